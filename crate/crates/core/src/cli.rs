//! Batch front end. Every invocation prints JSON on stdout: one
//! `{"status", "payload", "provenance"}` object, or one per line for list
//! outputs.
//!
//! Exit codes: 0 success, 1 domain error or failed verification, 2
//! malformed input.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cuts::{cg_cuts, icr_candidates, icr_search, GeneratorStream, IcrOutcome};
use crate::error::Error;
use crate::json::{self, SchemaError};
use crate::linalg::det;
use crate::psd::{
    decompose, is_sporadic, random_psd, search_sporadic, sporadic_catalog, unimodular_witness,
};
use crate::soc::{
    decompose_soc, descend, is_sporadic_soc, minimal_roots, pythagorean_orbit, random_cone_point,
    roots, GroupWord,
};

#[derive(Parser, Debug)]
#[command(
    name = "intcone",
    version,
    about = "Exact PSD / second-order cone semigroup tools"
)]
struct Cli {
    /// Seed for every randomized input generator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank-1 decomposition of a PSD matrix ({"n","rows"}).
    PsdDecompose {
        input: Option<PathBuf>,
        /// Decompose a seeded random matrix instead of reading one.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    /// Whether a PSD matrix is sporadic, and its determinant.
    PsdSporadic { input: Option<PathBuf> },
    /// Sporadic classes up to equivalence with diagonal entries ≤ the bound.
    PsdSearchSporadic {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        diag_bound: i64,
    },
    /// Unimodular equivalence of two PSD matrices.
    PsdEquiv { x: PathBuf, y: PathBuf },
    /// Decomposition of an SOC point ({"n","coords"}) into translated roots.
    SocDecompose {
        input: Option<PathBuf>,
        #[arg(long)]
        minimal_roots: bool,
        /// Decompose a seeded random point instead of reading one.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        max_height: i64,
    },
    /// Height descent of a primitive Pythagorean or sporadic point to a root.
    SocDescend { input: Option<PathBuf> },
    /// The roots of T_n.
    SocRoots {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        minimal_roots: bool,
    },
    /// Whether an SOC point is sporadic, and its Lorentz form.
    SocSporadic { input: Option<PathBuf> },
    /// Primitive Pythagorean tuples up to a height, as the orbit of the roots.
    SocTree {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 30)]
        max_height: i64,
    },
    /// Chvátal-Gomory cuts for an LCI system ({"cone","n","c","A"}).
    CgCuts {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        word_cap: usize,
        /// Drop generators whose height (SOC) or trace (PSD) exceeds this.
        #[arg(long)]
        max_height: Option<BigInt>,
    },
    /// Fewest generators summing to a matrix or point.
    IcrSearch {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        word_cap: usize,
        /// Largest count searched; defaults to 2N - 2.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Re-check certificates emitted by the other subcommands.
    Verify { input: Option<PathBuf> },
}

enum Failure {
    Malformed(String),
    Domain(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Malformed(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Malformed(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure::Malformed(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Ctx<'a> {
    stdin: &'a mut dyn Read,
    hasher: Sha256,
}

impl Ctx<'_> {
    fn read(&mut self, path: Option<&PathBuf>) -> Outcome<String> {
        let text = match path {
            Some(p) if p.as_os_str() != "-" => fs::read_to_string(p)
                .map_err(|e| Failure::Malformed(format!("{}: {e}", p.display())))?,
            _ => {
                let mut s = String::new();
                self.stdin
                    .read_to_string(&mut s)
                    .map_err(|e| Failure::Malformed(format!("stdin: {e}")))?;
                s
            }
        };
        self.hasher.update(text.as_bytes());
        Ok(text)
    }

    fn read_json(&mut self, path: Option<&PathBuf>) -> Outcome<Value> {
        let text = self.read(path)?;
        serde_json::from_str(&text).map_err(|e| Failure::Malformed(e.to_string()))
    }
}

/// Parses `argv` (program name first), runs the command and writes its
/// JSON to `out`. Returns the process exit code.
pub fn run<I, T>(argv: I, stdin: &mut dyn Read, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut hasher = Sha256::new();
    for a in argv.iter().skip(1) {
        hasher.update(a.to_string_lossy().as_bytes());
        hasher.update([0u8]);
    }
    let mut ctx = Ctx { stdin, hasher };
    let result = execute(&cli, &mut ctx);
    let provenance = json!({
        "input_hash": hex::encode(ctx.hasher.finalize()),
        "seed": cli.seed,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let (code, lines) = match result {
        Ok(payloads) => (
            0,
            payloads
                .into_iter()
                .map(|p| json!({"status": "ok", "payload": p, "provenance": provenance}))
                .collect::<Vec<_>>(),
        ),
        Err(f) => (
            f.code(),
            vec![json!({
                "status": "error",
                "payload": {"message": f.message()},
                "provenance": provenance,
            })],
        ),
    };
    for line in lines {
        if writeln!(out, "{line}").is_err() {
            return 1;
        }
    }
    code
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn execute(cli: &Cli, ctx: &mut Ctx) -> Outcome<Vec<Value>> {
    match &cli.command {
        Command::PsdDecompose { input, random, n } => {
            let x = if *random {
                if *n == 0 {
                    return Err(Failure::Domain("n must be positive".into()));
                }
                random_psd(*n, *n, 5, &mut rng(cli.seed))
            } else {
                json::matrix_from_json(&ctx.read_json(input.as_ref())?)?
            };
            let cert = decompose(&x)?;
            cert.verify(&x)?;
            Ok(vec![json!({
                "kind": "psd-certificate",
                "matrix": json::matrix_to_json(&x),
                "certificate": json::rank1_certificate_to_json(&cert),
            })])
        }
        Command::PsdSporadic { input } => {
            let x = json::matrix_from_json(&ctx.read_json(input.as_ref())?)?;
            let sporadic = is_sporadic(&x)?;
            Ok(vec![
                json!({"sporadic": sporadic, "det": json::int(&det(&x))}),
            ])
        }
        Command::PsdSearchSporadic { n, diag_bound } => {
            let catalog = sporadic_catalog(*n);
            let mut out = Vec::new();
            for m in search_sporadic(*n, *diag_bound)? {
                let mut class = Value::Null;
                for (name, c) in &catalog {
                    if unimodular_witness(c, &m)?.is_some() {
                        class = json!(name);
                        break;
                    }
                }
                out.push(json!({
                    "matrix": json::matrix_to_json(&m),
                    "det": json::int(&det(&m)),
                    "class": class,
                }));
            }
            Ok(out)
        }
        Command::PsdEquiv { x, y } => {
            let xv = ctx.read_json(Some(x))?;
            let yv = ctx.read_json(Some(y))?;
            let xm = json::matrix_from_json(&xv)?;
            let ym = json::matrix_from_json(&yv)?;
            let w = unimodular_witness(&xm, &ym)?;
            Ok(vec![json!({
                "kind": "psd-equivalence",
                "x": xv,
                "y": yv,
                "equivalent": w.is_some(),
                "witness": w.as_ref().map(json::unimodular_to_json),
            })])
        }
        Command::SocDecompose {
            input,
            minimal_roots,
            random,
            n,
            max_height,
        } => {
            let s = if *random {
                if !(crate::soc::MIN_DIM..=crate::soc::MAX_DIM).contains(n) || *max_height < 0 {
                    return Err(Failure::Domain(format!(
                        "cannot sample T_{n} up to height {max_height}"
                    )));
                }
                random_cone_point(*n, *max_height, &mut rng(cli.seed))
            } else {
                json::point_from_json(&ctx.read_json(input.as_ref())?)?
            };
            let cert = decompose_soc(&s, *minimal_roots)?;
            cert.verify(&s)?;
            Ok(vec![json!({
                "kind": "soc-certificate",
                "minimal_roots": minimal_roots,
                "point": json::point_to_json(&s),
                "certificate": json::soc_certificate_to_json(&cert),
            })])
        }
        Command::SocDescend { input } => {
            let s = json::point_from_json(&ctx.read_json(input.as_ref())?)?;
            let (root, word) = descend(&s)?;
            Ok(vec![json!({
                "kind": "soc-descent",
                "point": json::point_to_json(&s),
                "root": json::point_to_json(&root),
                "word": word.to_strings(),
            })])
        }
        Command::SocRoots { n, minimal_roots } => {
            let rs = if *minimal_roots {
                crate::soc::minimal_roots(*n)?
            } else {
                roots(*n)?
            };
            Ok(rs.iter().map(json::point_to_json).collect())
        }
        Command::SocSporadic { input } => {
            let s = json::point_from_json(&ctx.read_json(input.as_ref())?)?;
            let sporadic = is_sporadic_soc(&s)?;
            Ok(vec![
                json!({"sporadic": sporadic, "form": s.form().to_string().parse::<serde_json::Number>().expect("integer")}),
            ])
        }
        Command::SocTree { n, max_height } => Ok(pythagorean_orbit(*n, *max_height)?
            .iter()
            .map(json::point_to_json)
            .collect()),
        Command::CgCuts {
            input,
            word_cap,
            max_height,
        } => {
            let doc = ctx.read_json(input.as_ref())?;
            let sys = json::lci_from_json(&doc)?;
            let stream = GeneratorStream::new(sys.cone, *word_cap, max_height.clone())?;
            let set = cg_cuts(&sys, stream)?;
            let system = json::lci_to_json(&sys);
            Ok(set
                .cuts
                .iter()
                .map(|c| {
                    json!({
                        "kind": "cg-cut",
                        "system": system,
                        "truncated_at": set.truncated_at,
                        "cut": json::cut_to_json(c),
                    })
                })
                .collect())
        }
        Command::IcrSearch {
            input,
            word_cap,
            cap,
        } => {
            let s = json::element_from_document(&ctx.read_json(input.as_ref())?)?;
            let bound = s.cone().icr_bound();
            let gens = icr_candidates(&s, *word_cap)?;
            let outcome = icr_search(&s, &gens, cap.unwrap_or(bound))?;
            let (name, rank, terms) = match &outcome {
                IcrOutcome::Rank { rank, terms } => (
                    "rank",
                    json!(rank),
                    Value::Array(
                        terms
                            .iter()
                            .map(|(i, l)| {
                                json!({"lambda": json::int(l), "generator": json::element_to_json(&gens[*i])})
                            })
                            .collect(),
                    ),
                ),
                IcrOutcome::Exceeded => ("exceeded", Value::Null, Value::Null),
                IcrOutcome::Infeasible => ("infeasible", Value::Null, Value::Null),
            };
            Ok(vec![json!({
                "outcome": name,
                "rank": rank,
                "bound": bound,
                "terms": terms,
                "candidates": gens.len(),
            })])
        }
        Command::Verify { input } => {
            let text = ctx.read(input.as_ref())?;
            let mut kinds = Vec::new();
            for doc in serde_json::Deserializer::from_str(&text).into_iter::<Value>() {
                let doc = doc.map_err(|e| Failure::Malformed(e.to_string()))?;
                kinds.push(verify_document(&doc)?);
            }
            if kinds.is_empty() {
                return Err(Failure::Malformed("nothing to verify".into()));
            }
            Ok(vec![json!({"verified": kinds.len(), "kinds": kinds})])
        }
    }
}

fn get<'a>(v: &'a Value, key: &str) -> Outcome<&'a Value> {
    v.get(key)
        .ok_or_else(|| Failure::Malformed(format!("missing field {key:?}")))
}

fn mismatch(what: impl std::fmt::Display) -> Failure {
    Failure::Domain(format!("verification failed: {what}"))
}

/// Checks one certificate; accepts a bare payload or a full command result.
fn verify_document(doc: &Value) -> Outcome<String> {
    let payload = match doc.get("payload") {
        Some(p) if doc.get("status").is_some() => {
            if doc["status"] != "ok" {
                return Err(mismatch("document records a failed command"));
            }
            p
        }
        _ => doc,
    };
    let kind = get(payload, "kind")?
        .as_str()
        .ok_or_else(|| Failure::Malformed("\"kind\" must be a string".into()))?;
    match kind {
        "psd-certificate" => {
            let x = json::matrix_from_json(get(payload, "matrix")?)?;
            let cert = json::rank1_certificate_from_json(get(payload, "certificate")?)?;
            cert.verify(&x).map_err(mismatch)?;
        }
        "soc-certificate" => {
            let s = json::point_from_json(get(payload, "point")?)?;
            let cert = json::soc_certificate_from_json(get(payload, "certificate")?)?;
            cert.verify(&s).map_err(mismatch)?;
            if payload.get("minimal_roots").and_then(Value::as_bool) == Some(true) {
                let rs = minimal_roots(cert.n)?;
                if let Some(t) = cert.terms.iter().find(|t| !rs.contains(&t.root)) {
                    return Err(mismatch(format!("{} is not a minimal root", t.root)));
                }
            }
        }
        "soc-descent" => {
            let s = json::point_from_json(get(payload, "point")?)?;
            let root = json::point_from_json(get(payload, "root")?)?;
            let labels: Vec<String> = serde_json::from_value(get(payload, "word")?.clone())
                .map_err(|e| Failure::Malformed(e.to_string()))?;
            let word =
                GroupWord::parse(s.n(), &labels).map_err(|e| Failure::Malformed(e.to_string()))?;
            if root.n() != s.n() || !roots(s.n())?.contains(&root) {
                return Err(mismatch(format!("{root} is not a root")));
            }
            if word.apply(root.coords())? != s.coords() {
                return Err(mismatch("word does not map the root to the point"));
            }
        }
        "cg-cut" => {
            let sys = json::lci_from_json(get(payload, "system")?)?;
            let cut = json::cut_from_json(sys.cone, get(payload, "cut")?)?;
            if let Some(l) = payload.get("truncated_at").and_then(Value::as_u64) {
                if cut.provenance.word.len() as u64 > l {
                    return Err(mismatch("word longer than the truncation length"));
                }
            }
            if !cut.provenance.root.in_cone() || cut.provenance.root.is_zero() {
                return Err(mismatch("root is not a nonzero cone element"));
            }
            if !cut.replay(&sys)? {
                return Err(mismatch("cut does not replay from its provenance"));
            }
        }
        "psd-equivalence" => {
            let x = json::matrix_from_json(get(payload, "x")?)?;
            let y = json::matrix_from_json(get(payload, "y")?)?;
            let claimed = get(payload, "equivalent")?
                .as_bool()
                .ok_or_else(|| Failure::Malformed("\"equivalent\" must be a boolean".into()))?;
            match payload.get("witness") {
                Some(w) if !w.is_null() => {
                    let u = json::unimodular_from_json(w)?;
                    if !claimed || x.dim() != u.dim() || x.act(u.as_matrix()) != y {
                        return Err(mismatch("witness does not map X to Y"));
                    }
                }
                _ => {
                    if claimed || unimodular_witness(&x, &y)?.is_some() {
                        return Err(mismatch("equivalence claim without a valid witness"));
                    }
                }
            }
        }
        other => return Err(Failure::Malformed(format!("cannot verify kind {other:?}"))),
    }
    Ok(kind.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str], stdin: &str) -> (i32, Vec<Value>) {
        let mut argv = vec!["intcone"];
        argv.extend_from_slice(args);
        let mut input = stdin.as_bytes();
        let mut out = Vec::new();
        let code = run(argv, &mut input, &mut out);
        let text = String::from_utf8(out).unwrap();
        let lines = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        (code, lines)
    }

    const M6: &str = r#"{"n":6,"rows":[[2,0,1,1,1,1],[0,2,0,1,1,1],[1,0,2,1,1,1],[1,1,1,2,1,1],[1,1,1,1,2,1],[1,1,1,1,1,2]]}"#;
    const M6_PLUS_I: &str = r#"{"n":6,"rows":[[3,0,1,1,1,1],[0,3,0,1,1,1],[1,0,3,1,1,1],[1,1,1,3,1,1],[1,1,1,1,3,1],[1,1,1,1,1,3]]}"#;

    #[test]
    fn psd_sporadic_m6() {
        let (code, out) = call(&["psd-sporadic"], M6);
        assert_eq!(code, 0);
        assert_eq!(out[0]["payload"], json!({"sporadic": true, "det": 3}));
    }

    #[test]
    fn exit_codes() {
        let (code, out) = call(&["psd-decompose"], r#"{"n":2,"rows":[[1,2],[2,1]]}"#);
        assert_eq!(code, 1);
        assert_eq!(out[0]["status"], "error");
        let (code, _) = call(&["psd-decompose"], r#"{"n":2,"rows":[[1,2]"#);
        assert_eq!(code, 2);
        let (code, _) = call(&["psd-decompose"], r#"{"n":2,"rows":[[1,2],[3,1]]}"#);
        assert_eq!(code, 2);
    }

    #[test]
    fn soc_roots_seven() {
        let (code, out) = call(&["soc-roots", "--n", "7"], "");
        assert_eq!(code, 0);
        let coords: Vec<Value> = out.iter().map(|l| l["payload"]["coords"].clone()).collect();
        assert_eq!(
            coords,
            vec![
                json!([1, 0, 0, 0, 0, 0, 1]),
                json!([0, 0, 0, 0, 0, 0, 1]),
                json!([1, 1, 1, 1, 1, 1, 3])
            ]
        );
    }

    #[test]
    fn decompose_then_verify() {
        for m in [M6, M6_PLUS_I] {
            let (code, out) = call(&["psd-decompose"], m);
            assert_eq!(code, 0);
            assert_eq!(call(&["verify"], &out[0].to_string()).0, 0);
        }
        let (_, out) = call(&["psd-decompose"], M6_PLUS_I);
        let doc = out[0].to_string();
        let tampered = doc.replacen("\"multiplicity\":1", "\"multiplicity\":2", 1);
        assert_ne!(tampered, doc);
        assert_eq!(call(&["verify"], &tampered).0, 1);

        let (code, out) = call(&["soc-decompose"], r#"{"n":4,"coords":[3,4,1,9]}"#);
        assert_eq!(code, 0);
        let doc = out[0].to_string();
        assert_eq!(call(&["verify"], &doc).0, 0);
        let tampered = doc.replacen("\"lambda\":1", "\"lambda\":2", 1);
        assert_ne!(tampered, doc);
        assert_eq!(call(&["verify"], &tampered).0, 1);
    }

    #[test]
    fn cut_lines_verify() {
        let sys = r#"{"cone":"soc","n":3,"c":[0,0,1],"A":[[1,0,0]]}"#;
        let (code, out) = call(&["cg-cuts", "--word-cap", "1"], sys);
        assert_eq!(code, 0);
        assert!(!out.is_empty());
        let lines: Vec<String> = out.iter().map(Value::to_string).collect();
        assert_eq!(call(&["verify"], &lines.join("\n")).0, 0);
        let tampered = lines[0].replacen("\"rhs\":1", "\"rhs\":0", 1);
        assert_ne!(tampered, lines[0]);
        assert_eq!(call(&["verify"], &tampered).0, 1);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let a = call(
            &["--seed", "9", "soc-decompose", "--random", "--n", "6"],
            "",
        );
        let b = call(
            &["--seed", "9", "soc-decompose", "--random", "--n", "6"],
            "",
        );
        assert_eq!(a, b);
        assert_eq!(call(&["verify"], &a.1[0].to_string()).0, 0);
    }

    #[test]
    fn icr_cli() {
        let (code, out) = call(&["icr-search"], r#"{"n":3,"coords":[0,0,2]}"#);
        assert_eq!(code, 0);
        assert_eq!(out[0]["payload"]["rank"], json!(1));
        assert_eq!(
            out[0]["payload"]["terms"],
            json!([{"lambda": 2, "generator": [0, 0, 1]}])
        );
        assert_eq!(out[0]["payload"]["bound"], json!(4));
    }
}

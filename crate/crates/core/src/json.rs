//! JSON encodings of matrices, cone points, certificates, LCI systems and
//! cuts. Integers are written as bare JSON numbers of any size.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Number, Value};
use thiserror::Error;

use crate::cuts::{CgCut, Cone, ConeElement, ConeWord, Generator, LciSystem};
use crate::linalg::{IntMatrix, SymIntMatrix, UnimodularMatrix};
use crate::psd::{Rank1Certificate, Rank1Term, RemainderClass};
use crate::soc::{ConePoint, GroupWord, SocCertificate, SocTerm};

/// A document that does not match the expected schema.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed JSON: {0}")]
pub struct SchemaError(pub String);

pub type SchemaResult<T> = std::result::Result<T, SchemaError>;

fn bad<T>(msg: impl Into<String>) -> SchemaResult<T> {
    Err(SchemaError(msg.into()))
}

pub fn int(v: &BigInt) -> Value {
    Value::Number(v.to_string().parse::<Number>().expect("decimal integer"))
}

pub fn ints(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(int).collect())
}

fn small_ints(v: &[i64]) -> Value {
    Value::Array(v.iter().map(|&x| Value::from(x)).collect())
}

fn field<'a>(v: &'a Value, key: &str) -> SchemaResult<&'a Value> {
    v.get(key)
        .ok_or_else(|| SchemaError(format!("missing field {key:?}")))
}

fn object(v: &Value) -> SchemaResult<&Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| SchemaError("expected an object".into()))
}

fn array<'a>(v: &'a Value, what: &str) -> SchemaResult<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| SchemaError(format!("{what} must be an array")))
}

pub fn parse_int(v: &Value) -> SchemaResult<BigInt> {
    match v {
        Value::Number(n) => n
            .to_string()
            .parse::<BigInt>()
            .map_err(|_| SchemaError(format!("{n} is not an integer"))),
        _ => bad(format!("{v} is not an integer")),
    }
}

pub fn parse_ints(v: &Value) -> SchemaResult<Vec<BigInt>> {
    array(v, "vector")?.iter().map(parse_int).collect()
}

fn parse_i64(v: &Value) -> SchemaResult<i64> {
    parse_int(v)?
        .to_i64()
        .ok_or_else(|| SchemaError(format!("{v} does not fit in 64 bits")))
}

fn parse_usize(v: &Value) -> SchemaResult<usize> {
    parse_int(v)?
        .to_usize()
        .ok_or_else(|| SchemaError(format!("{v} is not a valid size")))
}

fn parse_strings(v: &Value) -> SchemaResult<Vec<String>> {
    array(v, "word")?
        .iter()
        .map(|s| {
            s.as_str()
                .map(str::to_string)
                .ok_or_else(|| SchemaError("word labels must be strings".into()))
        })
        .collect()
}

fn rows_value(m: &IntMatrix) -> Value {
    Value::Array(m.to_rows().iter().map(|r| ints(r)).collect())
}

fn parse_rows(v: &Value) -> SchemaResult<Vec<Vec<BigInt>>> {
    array(v, "rows")?.iter().map(parse_ints).collect()
}

pub fn matrix_to_json(m: &SymIntMatrix) -> Value {
    json!({"n": m.dim(), "rows": rows_value(m.as_matrix())})
}

fn sym_from_rows(rows: Vec<Vec<BigInt>>, n: Option<usize>) -> SchemaResult<SymIntMatrix> {
    if let Some(n) = n {
        if rows.len() != n {
            return bad(format!("\"n\" is {n} but there are {} rows", rows.len()));
        }
    }
    SymIntMatrix::from_rows(rows).map_err(|e| SchemaError(e.to_string()))
}

/// `{"n": int, "rows": [[int,...],...]}`, symmetric.
pub fn matrix_from_json(v: &Value) -> SchemaResult<SymIntMatrix> {
    let n = parse_usize(field(v, "n")?)?;
    sym_from_rows(parse_rows(field(v, "rows")?)?, Some(n))
}

pub fn unimodular_to_json(u: &UnimodularMatrix) -> Value {
    json!({"n": u.dim(), "rows": rows_value(u.as_matrix())})
}

pub fn unimodular_from_json(v: &Value) -> SchemaResult<UnimodularMatrix> {
    let n = parse_usize(field(v, "n")?)?;
    let rows = parse_rows(field(v, "rows")?)?;
    if rows.len() != n {
        return bad("row count does not match \"n\"");
    }
    let m = IntMatrix::from_rows(rows).map_err(|e| SchemaError(e.to_string()))?;
    UnimodularMatrix::new(m).map_err(|e| SchemaError(e.to_string()))
}

pub fn point_to_json(p: &ConePoint) -> Value {
    json!({"n": p.n(), "coords": small_ints(p.coords())})
}

/// `{"n": int, "coords": [int,...]}`.
pub fn point_from_json(v: &Value) -> SchemaResult<ConePoint> {
    let n = parse_usize(field(v, "n")?)?;
    let coords = array(field(v, "coords")?, "coords")?
        .iter()
        .map(parse_i64)
        .collect::<SchemaResult<Vec<_>>>()?;
    if coords.len() != n {
        return bad(format!(
            "\"n\" is {n} but there are {} coordinates",
            coords.len()
        ));
    }
    ConePoint::new(coords).map_err(|e| SchemaError(e.to_string()))
}

pub fn rank1_certificate_to_json(c: &Rank1Certificate) -> Value {
    json!({
        "n": c.n,
        "vectors": c.vectors.iter().map(|t| json!({
            "vector": ints(&t.vector),
            "multiplicity": int(&t.multiplicity),
        })).collect::<Vec<_>>(),
        "remainder": c.remainder.as_ref().map(matrix_to_json),
        "witness": c.witness.as_ref().map(unimodular_to_json),
        "remainder_class": c.remainder_class.as_ref().map(|k| match k {
            RemainderClass::Catalog(name) => name.clone(),
            RemainderClass::Unclassified => "unclassified".to_string(),
        }),
        "steps": c.steps,
    })
}

fn nullable<T>(
    v: Option<&Value>,
    f: impl FnOnce(&Value) -> SchemaResult<T>,
) -> SchemaResult<Option<T>> {
    match v {
        None | Some(Value::Null) => Ok(None),
        Some(x) => f(x).map(Some),
    }
}

pub fn rank1_certificate_from_json(v: &Value) -> SchemaResult<Rank1Certificate> {
    let n = parse_usize(field(v, "n")?)?;
    let vectors = array(field(v, "vectors")?, "vectors")?
        .iter()
        .map(|t| {
            Ok(Rank1Term {
                vector: parse_ints(field(t, "vector")?)?,
                multiplicity: parse_int(field(t, "multiplicity")?)?,
            })
        })
        .collect::<SchemaResult<Vec<_>>>()?;
    let remainder = nullable(v.get("remainder"), matrix_from_json)?;
    let witness = nullable(v.get("witness"), unimodular_from_json)?;
    let remainder_class = nullable(v.get("remainder_class"), |k| match k.as_str() {
        Some("unclassified") => Ok(RemainderClass::Unclassified),
        Some(name) => Ok(RemainderClass::Catalog(name.to_string())),
        None => bad("remainder_class must be a string"),
    })?;
    let steps = match v.get("steps") {
        Some(s) => parse_usize(s)?,
        None => 0,
    };
    Ok(Rank1Certificate {
        n,
        vectors,
        remainder,
        witness,
        remainder_class,
        steps,
    })
}

pub fn soc_certificate_to_json(c: &SocCertificate) -> Value {
    json!({
        "n": c.n,
        "terms": c.terms.iter().map(|t| json!({
            "lambda": t.lambda,
            "word": t.word.to_strings(),
            "root": small_ints(t.root.coords()),
        })).collect::<Vec<_>>(),
    })
}

pub fn soc_certificate_from_json(v: &Value) -> SchemaResult<SocCertificate> {
    let n = parse_usize(field(v, "n")?)?;
    let terms = array(field(v, "terms")?, "terms")?
        .iter()
        .map(|t| {
            let root = array(field(t, "root")?, "root")?
                .iter()
                .map(parse_i64)
                .collect::<SchemaResult<Vec<_>>>()?;
            if root.len() != n {
                return bad("root length does not match \"n\"");
            }
            Ok(SocTerm {
                lambda: parse_i64(field(t, "lambda")?)?,
                word: GroupWord::parse(n, &parse_strings(field(t, "word")?)?)
                    .map_err(|e| SchemaError(e.to_string()))?,
                root: ConePoint::new(root).map_err(|e| SchemaError(e.to_string()))?,
            })
        })
        .collect::<SchemaResult<Vec<_>>>()?;
    Ok(SocCertificate { n, terms })
}

pub fn cone_name(c: Cone) -> &'static str {
    match c {
        Cone::Psd(_) => "psd",
        Cone::Soc(_) => "soc",
    }
}

/// Rows for PSD, a flat vector for SOC.
pub fn element_to_json(e: &ConeElement) -> Value {
    match e {
        ConeElement::Psd(m) => rows_value(m.as_matrix()),
        ConeElement::Soc(v) => ints(v),
    }
}

pub fn element_from_json(cone: Cone, v: &Value) -> SchemaResult<ConeElement> {
    match cone {
        Cone::Psd(n) => sym_from_rows(parse_rows(v)?, Some(n)).map(ConeElement::Psd),
        Cone::Soc(n) => {
            let x = parse_ints(v)?;
            if x.len() != n {
                return bad(format!("expected {n} coordinates, found {}", x.len()));
            }
            Ok(ConeElement::Soc(x))
        }
    }
}

pub fn parse_cone(v: &Value) -> SchemaResult<Cone> {
    let n = parse_usize(field(v, "n")?)?;
    if n == 0 {
        return bad("\"n\" must be positive");
    }
    match field(v, "cone")?.as_str() {
        Some("psd") => Ok(Cone::Psd(n)),
        Some("soc") => Ok(Cone::Soc(n)),
        _ => bad("\"cone\" must be \"psd\" or \"soc\""),
    }
}

pub fn lci_to_json(sys: &LciSystem) -> Value {
    json!({
        "cone": cone_name(sys.cone),
        "n": sys.cone.n(),
        "c": element_to_json(&sys.c),
        "A": sys.a.iter().map(element_to_json).collect::<Vec<_>>(),
    })
}

/// `{"cone": "psd"|"soc", "n": int, "c": …, "A": […]}`.
pub fn lci_from_json(v: &Value) -> SchemaResult<LciSystem> {
    let cone = parse_cone(v)?;
    let c = element_from_json(cone, field(v, "c")?)?;
    let a = array(field(v, "A")?, "A")?
        .iter()
        .map(|x| element_from_json(cone, x))
        .collect::<SchemaResult<Vec<_>>>()?;
    LciSystem::new(c, a).map_err(|e| SchemaError(e.to_string()))
}

pub fn cut_to_json(cut: &CgCut) -> Value {
    json!({
        "u": ints(&cut.u),
        "rhs": int(&cut.rhs),
        "provenance": {
            "root": element_to_json(&cut.provenance.root),
            "word": cut.provenance.word.labels(),
            "generator": element_to_json(&cut.provenance.element),
        },
    })
}

pub fn cut_from_json(cone: Cone, v: &Value) -> SchemaResult<CgCut> {
    let prov = field(v, "provenance")?;
    let labels = parse_strings(field(prov, "word")?)?;
    Ok(CgCut {
        u: parse_ints(field(v, "u")?)?,
        rhs: parse_int(field(v, "rhs")?)?,
        provenance: Generator {
            element: element_from_json(cone, field(prov, "generator")?)?,
            root: element_from_json(cone, field(prov, "root")?)?,
            word: ConeWord::parse(cone, &labels).map_err(|e| SchemaError(e.to_string()))?,
        },
    })
}

/// Reads either a PSD matrix document or an SOC point document.
pub fn element_from_document(v: &Value) -> SchemaResult<ConeElement> {
    let obj = object(v)?;
    if obj.contains_key("rows") {
        Ok(ConeElement::Psd(matrix_from_json(v)?))
    } else if obj.contains_key("coords") {
        let n = parse_usize(field(v, "n")?)?;
        let c = element_from_json(Cone::Soc(n), field(v, "coords")?)?;
        Ok(c)
    } else {
        bad("expected a matrix (\"rows\") or a point (\"coords\")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psd::{decompose, m6};
    use crate::soc::decompose_soc;

    #[test]
    fn big_integers_survive() {
        let x: BigInt = "123456789012345678901234567890".parse().unwrap();
        let v = int(&x);
        assert_eq!(v.to_string(), "123456789012345678901234567890");
        assert_eq!(parse_int(&v).unwrap(), x);
        assert!(parse_int(&json!(1.5)).is_err());
        assert!(parse_int(&json!("7")).is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let m = m6();
        let v = matrix_to_json(&m);
        assert_eq!(matrix_from_json(&v).unwrap(), m);
        let asym = json!({"n": 2, "rows": [[1, 2], [3, 4]]});
        assert!(matrix_from_json(&asym).is_err());
        let short = json!({"n": 3, "rows": [[1, 0], [0, 1]]});
        assert!(matrix_from_json(&short).is_err());
    }

    #[test]
    fn certificates_round_trip() {
        let x = m6().add(&SymIntMatrix::identity(6));
        let c = decompose(&x).unwrap();
        let back = rank1_certificate_from_json(&rank1_certificate_to_json(&c)).unwrap();
        assert_eq!(back, c);

        let s = ConePoint::new(vec![3, 4, 1, 9]).unwrap();
        let c = decompose_soc(&s, false).unwrap();
        let back = soc_certificate_from_json(&soc_certificate_to_json(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn lci_round_trip() {
        let v = json!({"cone": "psd", "n": 2, "c": [[1, 0], [0, 1]], "A": [[[1, 0], [0, 0]]]});
        let sys = lci_from_json(&v).unwrap();
        assert_eq!(lci_to_json(&sys), v);
        let bad = json!({"cone": "soc", "n": 3, "c": [0, 0, 1], "A": [[1, 0]]});
        assert!(lci_from_json(&bad).is_err());
    }
}

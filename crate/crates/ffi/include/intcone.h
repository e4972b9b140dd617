#ifndef INTCONE_H
#define INTCONE_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result codes shared by every entry point.
typedef enum IcStatus {
  IC_STATUS_OK = 0,
  IC_STATUS_NULL_POINTER = 1,
  IC_STATUS_MALFORMED = 2,
  IC_STATUS_NOT_PSD = 3,
  IC_STATUS_NOT_IN_CONE = 4,
  IC_STATUS_DOMAIN = 5,
  IC_STATUS_OVERFLOW = 6,
  IC_STATUS_PANIC = 7,
} IcStatus;

// A symmetric integer matrix.
typedef struct IcMatrix IcMatrix;

// An integer point of the second-order cone.
typedef struct IcPoint IcPoint;

// A rank-1 decomposition together with the matrix it decomposes.
typedef struct IcPsdCertificate IcPsdCertificate;

// An SOC decomposition together with the point it decomposes.
typedef struct IcSocCertificate IcSocCertificate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *ic_last_error(void);

// Library version as a static string.
const char *ic_version(void);

// # Safety
// `s` must be NULL or a string returned by this library.
void ic_string_free(char *s);

// Builds an n×n matrix from `n*n` row-major entries; fails unless symmetric.
//
// # Safety
// `entries` must point to `n*n` readable values and `out` must be writable.
enum IcStatus ic_matrix_new(size_t n, const int64_t *entries, struct IcMatrix **out);

// Parses `{"n": int, "rows": [[int,...],...]}`.
//
// # Safety
// `text` must be a NUL-terminated string and `out` must be writable.
enum IcStatus ic_matrix_from_json(const char *text, struct IcMatrix **out);

// # Safety
// `m` must be NULL or a handle from this library, not yet freed.
void ic_matrix_free(struct IcMatrix *m);

// # Safety
// `m` must be a live handle.
size_t ic_matrix_dim(const struct IcMatrix *m);

// Determinant, if it fits in 64 bits.
//
// # Safety
// `m` must be a live handle and `out` writable.
enum IcStatus ic_matrix_det(const struct IcMatrix *m, int64_t *out);

// # Safety
// `m` must be a live handle and `out` writable.
enum IcStatus ic_psd_is_sporadic(const struct IcMatrix *m, bool *out);

// # Safety
// `m` must be a live handle and `out` writable.
enum IcStatus ic_psd_decompose(const struct IcMatrix *m, struct IcPsdCertificate **out);

// Number of rank-1 terms (without multiplicity).
//
// # Safety
// `c` must be a live handle.
size_t ic_psd_certificate_terms(const struct IcPsdCertificate *c);

// Whether the decomposition left a sporadic remainder.
//
// # Safety
// `c` must be a live handle.
bool ic_psd_certificate_has_remainder(const struct IcPsdCertificate *c);

// Re-checks the certificate against the matrix it was built from.
//
// # Safety
// `c` must be a live handle.
enum IcStatus ic_psd_certificate_verify(const struct IcPsdCertificate *c);

// Certificate as JSON; release with [`ic_string_free`].
//
// # Safety
// `c` must be a live handle and `out` writable.
enum IcStatus ic_psd_certificate_to_json(const struct IcPsdCertificate *c, char **out);

// # Safety
// `c` must be NULL or a live handle.
void ic_psd_certificate_free(struct IcPsdCertificate *c);

// # Safety
// `coords` must point to `n` readable values and `out` must be writable.
enum IcStatus ic_point_new(size_t n, const int64_t *coords, struct IcPoint **out);

// # Safety
// `p` must be NULL or a live handle.
void ic_point_free(struct IcPoint *p);

// # Safety
// `p` must be a live handle and `out` writable.
enum IcStatus ic_soc_is_sporadic(const struct IcPoint *p, bool *out);

// # Safety
// `p` must be a live handle and `out` writable.
enum IcStatus ic_soc_decompose(const struct IcPoint *p,
                               bool minimal_roots,
                               struct IcSocCertificate **out);

// Number of terms λ·(w·r).
//
// # Safety
// `c` must be a live handle.
size_t ic_soc_certificate_terms(const struct IcSocCertificate *c);

// # Safety
// `c` must be a live handle.
enum IcStatus ic_soc_certificate_verify(const struct IcSocCertificate *c);

// # Safety
// `c` must be a live handle and `out` writable.
enum IcStatus ic_soc_certificate_to_json(const struct IcSocCertificate *c, char **out);

// # Safety
// `c` must be NULL or a live handle.
void ic_soc_certificate_free(struct IcSocCertificate *c);

// The roots of T_n as a JSON array of coordinate arrays.
//
// # Safety
// `out` must be writable.
enum IcStatus ic_soc_roots_json(size_t n, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INTCONE_H */

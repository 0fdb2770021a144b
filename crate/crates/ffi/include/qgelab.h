#ifndef QGELAB_H
#define QGELAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QgeStatus {
  QGE_STATUS_OK = 0,
  QGE_STATUS_NULL_POINTER = 1,
  QGE_STATUS_INVALID_ARGUMENT = 2,
  QGE_STATUS_BUFFER_TOO_SMALL = 3,
  QGE_STATUS_NOT_QUATERNIONIC = 4,
  QGE_STATUS_NUMERICAL = 5,
  QGE_STATUS_DEGENERATE = 6,
  QGE_STATUS_IO = 7,
  QGE_STATUS_PANIC = 8,
} QgeStatus;

/*
 A quaternionic matrix.
 */
typedef struct QgeMatrix QgeMatrix;

/*
 The result of an experiment run.
 */
typedef struct QgeReport QgeReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Version string of the library; static, do not free.
 */
const char *qge_version(void);

/*
 Message of the last failed call on this thread, or NULL. The caller owns
 the string and frees it with [`qge_string_free`].
 */
char *qge_last_error(void);

/*
 # Safety
 `s` must come from this library and not have been freed.
 */
void qge_string_free(char *s);

/*
 Samples an `n×n` quaternionic Ginibre matrix for `(seed, trial)`;
 `scaled != 0` divides it by `sqrt(2n)`.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum QgeStatus qge_matrix_sample_ginibre(size_t n,
                                         uint64_t seed,
                                         uint64_t trial,
                                         int scaled,
                                         struct QgeMatrix **out);

/*
 Builds a matrix from its `2n×2n` complex embedding (`dim = 2n`,
 `4n²` complex entries interleaved). Fails with `NotQuaternionic` if the
 block structure does not hold.

 # Safety
 `data` must point to `2·dim·dim` readable doubles; `out` must be writable.
 */
enum QgeStatus qge_matrix_from_embedding(const double *data, size_t dim, struct QgeMatrix **out);

/*
 # Safety
 `m` must come from this library and not have been freed.
 */
void qge_matrix_free(struct QgeMatrix *m);

/*
 Quaternionic size `n` of the matrix (0 for NULL).

 # Safety
 `m` must be NULL or a live handle.
 */
size_t qge_matrix_size(const struct QgeMatrix *m);

/*
 Writes the `2n×2n` complex embedding; `capacity` counts complex entries.

 # Safety
 `m` must be a live handle and `out` must hold `2·capacity` doubles.
 */
enum QgeStatus qge_matrix_embed(const struct QgeMatrix *m, double *out, size_t capacity);

/*
 Writes the `n` upper-half-plane eigenvalue representatives.

 # Safety
 `m` must be a live handle and `out` must hold `2·capacity` doubles.
 */
enum QgeStatus qge_matrix_spectrum(const struct QgeMatrix *m, double *out, size_t capacity);

/*
 `‖M‖_F² − Σ|λ|²` of the complex embedding.

 # Safety
 `m` must be a live handle and `out` writable.
 */
enum QgeStatus qge_matrix_lack_of_normality(const struct QgeMatrix *m, double *out);

/*
 Eigenvalues of the embedding (`2n` complex) and the matching diagonal
 overlaps `O_ii` (`2n` reals).

 # Safety
 `m` must be a live handle; `eigenvalues` must hold `4n` doubles and
 `diagonal` `2n` doubles, where `capacity >= 2n`.
 */
enum QgeStatus qge_matrix_overlaps(const struct QgeMatrix *m,
                                   double *eigenvalues,
                                   double *diagonal,
                                   size_t capacity);

/*
 Pfaffian of a `dim×dim` skew-symmetric complex matrix.

 # Safety
 `data` must hold `2·dim·dim` doubles; `out` must hold 2 doubles.
 */
enum QgeStatus qge_pfaffian(const double *data, size_t dim, double *out);

/*
 `E ∏ g(|λ_i|²)` over the QGE of size `n`, for the radial polynomial
 `g(t) = Σ coeffs[k] t^k`, computed exactly from a Pfaffian.

 # Safety
 `coeffs` must hold `len` doubles; `out` must hold 2 doubles.
 */
enum QgeStatus qge_product_statistic(const double *coeffs, size_t len, size_t n, double *out);

/*
 Runs the experiment described by a JSON run configuration (the `config`
 object embedded in every report).

 # Safety
 `config_json` must be a NUL-terminated string; `out` must be writable.
 */
enum QgeStatus qge_run_experiment(const char *config_json, struct QgeReport **out);

/*
 1 if every asserted verdict passed, 0 otherwise (and for NULL).

 # Safety
 `r` must be NULL or a live handle.
 */
int qge_report_passed(const struct QgeReport *r);

/*
 The report as JSON; free with [`qge_string_free`]. NULL on failure.

 # Safety
 `r` must be a live handle.
 */
char *qge_report_json(const struct QgeReport *r);

/*
 # Safety
 `r` must come from this library and not have been freed.
 */
void qge_report_free(struct QgeReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QGELAB_H */

#ifndef OSCMAX_H
#define OSCMAX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Largest dimension whose witness anchor fits in [`OscmaxNormReport`].
#define OSCMAX_MAX_DIM 8

typedef enum OscmaxFamily {
  OSCMAX_FAMILY_CONTAINED = 0,
  OSCMAX_FAMILY_CENTERED = 1,
} OscmaxFamily;

typedef enum OscmaxStatus {
  OSCMAX_STATUS_OK = 0,
  OSCMAX_STATUS_NULL_POINTER = 1,
  OSCMAX_STATUS_PARAMETER = 2,
  OSCMAX_STATUS_DOMAIN = 3,
  OSCMAX_STATUS_PRECONDITION = 4,
  OSCMAX_STATUS_BUDGET = 5,
  OSCMAX_STATUS_SIZE_CAP = 6,
  OSCMAX_STATUS_FORMAT = 7,
  OSCMAX_STATUS_IO = 8,
  OSCMAX_STATUS_BUFFER_TOO_SMALL = 9,
  OSCMAX_STATUS_PANIC = 10,
} OscmaxStatus;

// Opaque grid function handle.
typedef struct OscmaxGrid OscmaxGrid;

// Norm value with the window attaining it.
typedef struct OscmaxNormReport {
  double norm_value;
  // Minimising constant (BMO) or β-essential infimum (BLO); NaN if none.
  double witness_c;
  uint64_t witness_side_cells;
  // First `dim` entries are the witness anchor in cells.
  int64_t witness_anchor[OSCMAX_MAX_DIM];
} OscmaxNormReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length without the NUL.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t oscmax_last_error(char *buf, size_t len);

// Create a grid of `2^(dim·resolution)` row-major values on the dyadic root
// cube `[0, 2^root_level)^dim`.
//
// # Safety
// `values` must be valid for `len` reads; `out` must be valid for a write.
enum OscmaxStatus oscmax_grid_new(size_t dim,
                                  int32_t root_level,
                                  uint32_t resolution,
                                  const double *values,
                                  size_t len,
                                  struct OscmaxGrid **out);

// Release a grid. Null is ignored.
//
// # Safety
// `grid` must come from [`oscmax_grid_new`] and not be used afterwards.
void oscmax_grid_free(struct OscmaxGrid *grid);

// Number of cells of a grid (0 for null).
//
// # Safety
// `grid` must be null or a live handle.
size_t oscmax_grid_len(const struct OscmaxGrid *grid);

// Content `H^β_∞` of the cells whose `mask` entry is nonzero.
//
// # Safety
// `mask` must be valid for `len` reads; `out` must be valid for a write.
enum OscmaxStatus oscmax_content(size_t dim,
                                 int32_t root_level,
                                 uint32_t resolution,
                                 const uint8_t *mask,
                                 size_t len,
                                 double beta,
                                 double *out);

// Choquet integral of a nonnegative grid over the root; with `p > 0` the
// Choquet `L^p` norm instead.
//
// # Safety
// `grid` must be a live handle; `out` must be valid for a write.
enum OscmaxStatus oscmax_choquet(const struct OscmaxGrid *grid, double beta, double p, double *out);

// Fractional maximal function `M_α f` written cellwise into `out`.
// `max_radius < 0` leaves the centered family unbounded.
//
// # Safety
// `grid` must be a live handle; `out` must be valid for `out_len` writes.
enum OscmaxStatus oscmax_fractional_maximal(const struct OscmaxGrid *grid,
                                            double alpha,
                                            enum OscmaxFamily fam,
                                            int64_t max_radius,
                                            double *out,
                                            size_t out_len);

// β-dimensional maximal function `M^β f` written cellwise into `out`.
//
// # Safety
// As for [`oscmax_fractional_maximal`].
enum OscmaxStatus oscmax_beta_maximal(const struct OscmaxGrid *grid,
                                      double beta,
                                      enum OscmaxFamily fam,
                                      int64_t max_radius,
                                      double *out,
                                      size_t out_len);

// `‖f‖_{BMO^{β,p}}` with its witness window.
//
// # Safety
// `grid` must be a live handle; `out` must be valid for a write.
enum OscmaxStatus oscmax_bmo_norm(const struct OscmaxGrid *grid,
                                  double beta,
                                  double p,
                                  enum OscmaxFamily fam,
                                  int64_t max_radius,
                                  struct OscmaxNormReport *out);

// `‖f‖_{BLO^{β,p}}` with its witness window.
//
// # Safety
// As for [`oscmax_bmo_norm`].
enum OscmaxStatus oscmax_blo_norm(const struct OscmaxGrid *grid,
                                  double beta,
                                  double p,
                                  enum OscmaxFamily fam,
                                  int64_t max_radius,
                                  struct OscmaxNormReport *out);

// Run a named experiment suite with its default configuration. The JSON
// report is returned in `out_json` (free with [`oscmax_string_free`]) and
// `out_passed` is set to 1 when no verdict failed.
//
// # Safety
// `suite` must be a NUL-terminated string; the out pointers must be valid
// for a write.
enum OscmaxStatus oscmax_verify(const char *suite,
                                uint64_t seed,
                                char **out_json,
                                int32_t *out_passed);

// Release a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void oscmax_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OSCMAX_H */

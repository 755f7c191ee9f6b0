#ifndef RESONANT_H
#define RESONANT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define RS_CLOSURE_MASK_DIRICHLET 1

#define RS_CLOSURE_MASK_NEUMANN 2

#define RS_DISCRETIZATION_COLLOCATION 0

#define RS_DISCRETIZATION_ULTRASPHERICAL 1

typedef enum RsClosure {
  RS_CLOSURE_DIRICHLET = 1,
  RS_CLOSURE_NEUMANN = 2,
} RsClosure;

// Result codes.
typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_ARGUMENT = 2,
  RS_STATUS_NUMERICAL_FAILURE = 3,
  RS_STATUS_OUT_OF_RANGE = 4,
  RS_STATUS_BUFFER_TOO_SMALL = 5,
  RS_STATUS_PANIC = 6,
} RsStatus;

// Opaque surface model.
typedef struct RsModel RsModel;

// Opaque pipeline result.
typedef struct RsResonanceSet RsResonanceSet;

typedef struct RsComplex {
  double re;
  double im;
} RsComplex;

// Pipeline settings; `shifts` may be null with `shift_count == 0` for automatic tiling.
typedef struct RsPipelineConfig {
  size_t grid_n;
  double x_min;
  // Bitmask of `RS_CLOSURE_MASK_*`.
  uint32_t closures;
  double residual_tol;
  double match_tol;
  double keep_radius;
  double cluster_tol;
  // One of `RS_DISCRETIZATION_*`.
  uint32_t discretization;
  const struct RsComplex *shifts;
  size_t shift_count;
} RsPipelineConfig;

// Closed rectangle in the `lambda` plane.
typedef struct RsWindow {
  double re_min;
  double re_max;
  double im_min;
  double im_max;
} RsWindow;

typedef struct RsCandidate {
  struct RsComplex lambda;
  struct RsComplex zeta;
  int64_t mode_k;
  double residual;
  double match_error;
  enum RsClosure closure;
  size_t grid_n;
} RsCandidate;

typedef struct RsExactResonance {
  struct RsComplex lambda;
  enum RsClosure closure;
  uint32_t multiplicity;
} RsExactResonance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error of this thread into `buf` (NUL-terminated, truncated to
// `len`) and returns the full message length excluding the terminator.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t rs_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *rs_version(void);

// Hyperbolic cylinder with neck length `ell`.
//
// # Safety
// `out` must be a valid pointer.
enum RsStatus rs_model_cylinder(double ell, struct RsModel **out);

// Cylinder whose warp carries a Gaussian bump of amplitude `a` and width `w`.
//
// # Safety
// `out` must be a valid pointer.
enum RsStatus rs_model_perturbed(double ell, double a, double w, struct RsModel **out);

// # Safety
// `model` must be null or a handle from `rs_model_*` not yet freed.
void rs_model_free(struct RsModel *model);

// Fills `out` with the library defaults (automatic shifts).
//
// # Safety
// `out` must be a valid pointer.
enum RsStatus rs_pipeline_config_default(struct RsPipelineConfig *out);

// Resonances of `model` for modes `k_min..=k_max` inside `window`.
//
// # Safety
// `model` must be a live handle, `config` null (defaults) or valid, `out` valid.
enum RsStatus rs_compute_resonances(const struct RsModel *model,
                                    int64_t k_min,
                                    int64_t k_max,
                                    struct RsWindow window,
                                    const struct RsPipelineConfig *config,
                                    struct RsResonanceSet **out);

// # Safety
// `set` must be a live handle and `len` valid.
enum RsStatus rs_resonance_set_len(const struct RsResonanceSet *set, size_t *len);

// Candidate `index` in `(mode_k, Re lambda, Im lambda, closure)` order.
//
// # Safety
// `set` must be a live handle and `out` valid.
enum RsStatus rs_resonance_set_get(const struct RsResonanceSet *set,
                                   size_t index,
                                   struct RsCandidate *out);

// Number of warnings recorded while computing `set`.
//
// # Safety
// `set` must be a live handle and `count` valid.
enum RsStatus rs_resonance_set_warning_count(const struct RsResonanceSet *set, size_t *count);

// # Safety
// `set` must be null or a live handle.
void rs_resonance_set_free(struct RsResonanceSet *set);

// Exact cylinder resonances of mode `k` in `window`, written to `buf`.
//
// `*len` receives the number of values; `RS_STATUS_BUFFER_TOO_SMALL` is
// returned when it exceeds `capacity`, with nothing written.
//
// # Safety
// `buf` must be valid for `capacity` elements (or null when `capacity` is 0); `len` valid.
enum RsStatus rs_cylinder_exact(double ell,
                                int64_t k,
                                struct RsWindow window,
                                struct RsExactResonance *buf,
                                size_t capacity,
                                size_t *len);

// Runs a named oracle suite; `*all_pass` reports whether every check passed.
//
// # Safety
// `suite` must be a NUL-terminated string and `all_pass` valid.
enum RsStatus rs_verify(const char *suite, bool *all_pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESONANT_H */

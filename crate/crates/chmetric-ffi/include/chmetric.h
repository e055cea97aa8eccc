#ifndef CHMETRIC_H
#define CHMETRIC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Field selector for `chm_scaled_field`.
 */
typedef enum ChmField {
  /**
   * Rescaled energy variable on (0, 1).
   */
  ChmFieldEta = 0,
  /**
   * Rescaled position.
   */
  ChmFieldPosition = 1,
  /**
   * Rescaled velocity.
   */
  ChmFieldVelocity = 2,
  /**
   * Square root of the rescaled pressure.
   */
  ChmFieldPressureSqrt = 3,
} ChmField;

/**
 * Result codes returned by every fallible `chm_*` call.
 */
typedef enum ChmStatus {
  /**
   * The call succeeded.
   */
  ChmOk = 0,
  /**
   * A required pointer argument was null.
   */
  ChmNullArgument = 1,
  /**
   * A parameter was outside the admissible range.
   */
  ChmInvalidArgument = 2,
  /**
   * The requested quantity is undefined at the given time.
   */
  ChmUndefined = 3,
  /**
   * The two states live on different grids.
   */
  ChmMismatch = 4,
  /**
   * Internal failure; the output pointers are untouched.
   */
  ChmInternal = 5,
} ChmStatus;

/**
 * Opaque handle to a rescaled state on the unit interval.
 */
typedef struct ChmScaled ChmScaled;

/**
 * Opaque handle to a conservative peakon-antipeakon solution.
 */
typedef struct ChmSolution ChmSolution;

/**
 * Distance between two rescaled states, split into its four terms.
 */
typedef struct ChmDistance {
  /**
   * L2 gap of the rescaled positions.
   */
  double position;
  /**
   * L2 gap of the rescaled velocities.
   */
  double velocity;
  /**
   * L2 gap of the square-root pressures.
   */
  double pressure_sqrt;
  /**
   * Gap of the amplitudes.
   */
  double amplitude;
  /**
   * Sum of the four terms.
   */
  double total;
} ChmDistance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the library as a static NUL-terminated string.
 */
const char *chm_version(void);

/**
 * Static description of a status code.
 */
const char *chm_status_message(enum ChmStatus status);

/**
 * Create a solution with energy parameter `e` (conserved energy C = e^2)
 * breaking at time `t0`. On success writes the new handle to `out`.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum ChmStatus chm_solution_new(double e, double t0, struct ChmSolution **out);

/**
 * Release a solution handle. Null is a no-op.
 *
 * # Safety
 * `solution` must be null or a handle from `chm_solution_new` that has not
 * been freed yet.
 */
void chm_solution_free(struct ChmSolution *solution);

/**
 * Conserved energy C of the solution.
 *
 * # Safety
 * `solution` must be null or a live solution handle; `out` must be null or
 * valid for writing one double.
 */
enum ChmStatus chm_solution_energy(const struct ChmSolution *solution, double *out);

/**
 * Pointwise velocity u(t, x) of the solution.
 *
 * # Safety
 * `solution` must be null or a live solution handle; `out` must be null or
 * valid for writing one double.
 */
enum ChmStatus chm_velocity_at(const struct ChmSolution *solution, double t, double x, double *out);

/**
 * Closed-form rescaled state of the solution at time `t` on `n` midpoint
 * nodes. On success writes the new handle to `out`.
 *
 * # Safety
 * `solution` must be null or a live solution handle; `out` must be null or
 * valid for writing one pointer.
 */
enum ChmStatus chm_scaled_exact(const struct ChmSolution *solution,
                                double t,
                                uintptr_t n,
                                struct ChmScaled **out);

/**
 * The zero solution as a rescaled state on `n` midpoint nodes.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum ChmStatus chm_scaled_zero(uintptr_t n, struct ChmScaled **out);

/**
 * Release a rescaled-state handle. Null is a no-op.
 *
 * # Safety
 * `scaled` must be null or a handle from `chm_scaled_exact` or
 * `chm_scaled_zero` that has not been freed yet.
 */
void chm_scaled_free(struct ChmScaled *scaled);

/**
 * Number of grid nodes of a rescaled state; 0 for a null handle.
 *
 * # Safety
 * `scaled` must be null or a live rescaled-state handle.
 */
uintptr_t chm_scaled_len(const struct ChmScaled *scaled);

/**
 * Amplitude sqrt(2C) of a rescaled state (0 for the zero solution).
 *
 * # Safety
 * `scaled` must be null or a live rescaled-state handle; `out` must be null
 * or valid for writing one double.
 */
enum ChmStatus chm_scaled_amplitude(const struct ChmScaled *scaled, double *out);

/**
 * Copy one field of a rescaled state into `buf`, which must hold `len`
 * doubles with `len` equal to `chm_scaled_len`.
 *
 * # Safety
 * `scaled` must be null or a live rescaled-state handle; `buf` must be null
 * or valid for writing `len` doubles.
 */
enum ChmStatus chm_scaled_field(const struct ChmScaled *scaled,
                                enum ChmField field,
                                double *buf,
                                uintptr_t len);

/**
 * Distance between two rescaled states on the same grid, written to `out`
 * term by term.
 *
 * # Safety
 * `a` and `b` must each be null or a live rescaled-state handle; `out` must
 * be null or valid for writing one `ChmDistance`.
 */
enum ChmStatus chm_distance(const struct ChmScaled *a,
                            const struct ChmScaled *b,
                            struct ChmDistance *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHMETRIC_H */

#ifndef BUBBLE_H
#define BUBBLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BubbleStatus {
  BUBBLE_STATUS_OK = 0,
  BUBBLE_STATUS_INVALID_PARAMETER = 1,
  BUBBLE_STATUS_DOMAIN = 2,
  BUBBLE_STATUS_UNSTABLE_GRID = 3,
  BUBBLE_STATUS_NOT_DIAGONALLY_DOMINANT = 4,
  BUBBLE_STATUS_MISSING_ORACLE = 5,
  BUBBLE_STATUS_IO = 6,
  BUBBLE_STATUS_CONFIG = 7,
  BUBBLE_STATUS_NULL_POINTER = 8,
  BUBBLE_STATUS_PANIC = 9,
} BubbleStatus;

typedef enum BubblePayoffKind {
  BUBBLE_PAYOFF_KIND_IDENTITY = 0,
  BUBBLE_PAYOFF_KIND_POWER = 1,
  BUBBLE_PAYOFF_KIND_CALL = 2,
  BUBBLE_PAYOFF_KIND_CONSTANT = 3,
} BubblePayoffKind;

typedef enum BubbleZeroHandling {
  BUBBLE_ZERO_HANDLING_ABSORB_AT_ZERO = 0,
  BUBBLE_ZERO_HANDLING_EXTEND_PAYOFF = 1,
} BubbleZeroHandling;

typedef enum BubbleRebateKind {
  BUBBLE_REBATE_KIND_ZERO = 0,
  BUBBLE_REBATE_KIND_CONSTANT = 1,
  BUBBLE_REBATE_KIND_POWER = 2,
} BubbleRebateKind;

/**
 * Opaque model handle.
 */
typedef struct BubbleModel BubbleModel;

/**
 * Opaque solved PDE surface.
 */
typedef struct BubbleSurface BubbleSurface;

/**
 * `param` is γ, the strike or the constant; ignored for `IDENTITY`.
 */
typedef struct BubblePayoff {
  enum BubblePayoffKind kind;
  double param;
} BubblePayoff;

/**
 * A non-positive or NaN `barrier` means no barrier.
 */
typedef struct BubbleMcConfig {
  double dt;
  uint64_t n_paths;
  uint64_t seed;
  double barrier;
  enum BubbleZeroHandling zero_handling;
  double t0;
  double maturity;
  bool antithetic;
} BubbleMcConfig;

typedef struct BubbleMcEstimate {
  double mean;
  double std_error;
  uint64_t n_paths;
  double hit_fraction;
  uint64_t overflow_count;
} BubbleMcEstimate;

/**
 * `param` is the constant or η; ignored for `ZERO`.
 */
typedef struct BubbleRebate {
  enum BubbleRebateKind kind;
  double param;
} BubbleRebate;

/**
 * `keep_every = 0` stores only the first and last time levels.
 */
typedef struct BubbleGrid {
  double beta;
  size_t n_space;
  size_t n_time;
  double theta;
  double maturity;
  size_t keep_every;
} BubbleGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *bubble_last_error_message(void);

/**
 * Static description of a status code.
 */
const char *bubble_status_str(enum BubbleStatus status);

const char *bubble_version(void);

/**
 * `σ(x) = c·x^p` started at `x0`.
 */
enum BubbleStatus bubble_model_new(double c, double p, double x0, struct BubbleModel **out);

void bubble_model_free(struct BubbleModel *model);

enum BubbleStatus bubble_model_sigma(const struct BubbleModel *model, double x, double *out);

/**
 * Writes `true` when the price process is a strict local martingale.
 */
enum BubbleStatus bubble_model_is_strict_local(const struct BubbleModel *model, bool *out);

enum BubbleStatus bubble_cev_price(double x, double t, double maturity, double *out);

enum BubbleStatus bubble_cev_family(double x,
                                    double t,
                                    double maturity,
                                    double lambda,
                                    double *out);

enum BubbleStatus bubble_martingale_defect(double x, double t, double maturity, double *out);

enum BubbleStatus bubble_payoff_eval(struct BubblePayoff payoff, double x, double *out);

/**
 * `f^β(x)`.
 */
enum BubbleStatus bubble_payoff_truncate(struct BubblePayoff payoff,
                                         double beta,
                                         double x,
                                         double *out);

/**
 * Plain Euler-Maruyama estimate; `cfg->barrier` must be unset.
 */
enum BubbleStatus bubble_mc_price_naive(const struct BubbleModel *model,
                                        struct BubblePayoff payoff,
                                        const struct BubbleMcConfig *cfg,
                                        struct BubbleMcEstimate *out);

/**
 * Knock-out estimate paying `g(β)` on a hit; `cfg->barrier` is β.
 */
enum BubbleStatus bubble_mc_price_rebate(const struct BubbleModel *model,
                                         struct BubblePayoff payoff,
                                         struct BubbleRebate rebate,
                                         const struct BubbleMcConfig *cfg,
                                         struct BubbleMcEstimate *out);

enum BubbleStatus bubble_mc_hitting_probability(const struct BubbleModel *model,
                                                const struct BubbleMcConfig *cfg,
                                                struct BubbleMcEstimate *out);

/**
 * Terminal `f^β`, zero upper boundary.
 */
enum BubbleStatus bubble_pde_solve_fbeta(const struct BubbleModel *model,
                                         struct BubblePayoff payoff,
                                         const struct BubbleGrid *grid,
                                         struct BubbleSurface **out);

/**
 * Terminal `f`, upper boundary `g(β)`.
 */
enum BubbleStatus bubble_pde_solve_rebate(const struct BubbleModel *model,
                                          struct BubblePayoff payoff,
                                          struct BubbleRebate rebate,
                                          const struct BubbleGrid *grid,
                                          struct BubbleSurface **out);

void bubble_surface_free(struct BubbleSurface *surface);

/**
 * Bilinear interpolation on the stored levels.
 */
enum BubbleStatus bubble_surface_at(const struct BubbleSurface *surface,
                                    double x,
                                    double t,
                                    double *out);

/**
 * Nodes per row (`n_space + 2`) and number of stored time levels.
 */
enum BubbleStatus bubble_surface_dims(const struct BubbleSurface *surface,
                                      size_t *n_nodes,
                                      size_t *n_levels);

enum BubbleStatus bubble_surface_corner_gap(const struct BubbleSurface *surface, double *out);

/**
 * Copies stored level `index` (ascending in time) into `buf`, which must
 * hold `len ≥ n_nodes` values, and writes its time to `t_out`.
 */
enum BubbleStatus bubble_surface_level(const struct BubbleSurface *surface,
                                       size_t index,
                                       double *t_out,
                                       double *buf,
                                       size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BUBBLE_H */

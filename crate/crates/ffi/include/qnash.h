#ifndef QNASH_H
#define QNASH_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

/*
 Result code of every API call.
 */
typedef enum QnStatus {
  QN_STATUS_OK = 0,
  QN_STATUS_NULL_POINTER = 1,
  QN_STATUS_INVALID_UTF8 = 2,
  QN_STATUS_BAD_SPEC = 3,
  QN_STATUS_INVALID_STATE = 4,
  QN_STATUS_IO = 5,
  QN_STATUS_INVALID_ARGUMENT = 6,
  QN_STATUS_INTERNAL = 7,
} QnStatus;

typedef enum QnVerdict {
  QN_VERDICT_STRICT_NASH_FOUND = 0,
  QN_VERDICT_WEAK_NASH_FLAT = 1,
  QN_VERDICT_WEAK_NASH_FOUND = 2,
  QN_VERDICT_NONE = 3,
} QnVerdict;

typedef enum QnNashClass {
  QN_NASH_CLASS_STRICT_NASH = 0,
  QN_NASH_CLASS_WEAK_NASH = 1,
  QN_NASH_CLASS_NOT_NASH = 2,
} QnNashClass;

typedef enum QnPlayer {
  QN_PLAYER_A = 0,
  QN_PLAYER_B = 1,
} QnPlayer;

typedef enum QnOrientation {
  QN_ORIENTATION_MEASURE_B = 0,
  QN_ORIENTATION_MEASURE_A = 1,
} QnOrientation;

/*
 Opaque game handle.
 */
typedef struct QnGame QnGame;

/*
 Opaque equilibrium report handle.
 */
typedef struct QnReport QnReport;

typedef struct QnDiscord {
  double discord;
  double optimal_theta;
  double optimal_phi;
  double mutual_information;
  double j_value;
} QnDiscord;

/*
 One stationary point; angles are (θa, θa′, θb, θb′).
 */
typedef struct QnCriticalPoint {
  double angles[4];
  double jacobian_norm;
  double hessian_diag[4];
  enum QnNashClass hessian_class;
  enum QnNashClass classification;
  double payoff_a;
  double payoff_b;
} QnCriticalPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. Valid until the
 next API call on the same thread.
 */
const char *qn_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *qn_version(void);

/*
 Builds a game from a state spec (`werner:0.1`, `d2:pi/2`, ...) and a payoff
 table name (`standard` or `biased`) with uniform priors.

 # Safety
 `state_spec` and `payoffs` must be NUL-terminated strings or null; `out`
 must be writable or null.
 */
enum QnStatus qn_game_new(const char *state_spec, const char *payoffs, struct QnGame **out);

/*
 # Safety
 `game` must come from [`qn_game_new`] and not have been freed, or be null.
 */
void qn_game_free(struct QnGame *game);

/*
 Expected payoff of `player` (0 = Alice, 1 = Bob) at `angles[4]`.

 # Safety
 `game` must be a live handle; `angles` must point to four doubles; `out`
 must be writable.
 */
enum QnStatus qn_game_expected_payoff(const struct QnGame *game,
                                      const double *angles,
                                      uint32_t player,
                                      double *out);

/*
 f = U_A − (U_A + U_B)/2 at `angles[4]`.

 # Safety
 As for [`qn_game_expected_payoff`].
 */
enum QnStatus qn_game_f(const struct QnGame *game, const double *angles, double *out);

/*
 Discord of the state named by `state_spec`, measuring B (`orientation` 0)
 or A (1).

 # Safety
 `state_spec` must be a NUL-terminated string; `out` must be writable.
 */
enum QnStatus qn_discord(const char *state_spec, uint32_t orientation, struct QnDiscord *out);

/*
 Runs the equilibrium search on a `grid`⁴ lattice (grid ≥ 5).

 # Safety
 `game` must be a live handle; `out` must be writable.
 */
enum QnStatus qn_find_equilibria(const struct QnGame *game, size_t grid, struct QnReport **out);

/*
 # Safety
 `report` must be a live handle; `out` must be writable.
 */
enum QnStatus qn_report_verdict(const struct QnReport *report, enum QnVerdict *out);

/*
 Number of stationary points in the report.

 # Safety
 `report` must be a live handle; `out` must be writable.
 */
enum QnStatus qn_report_point_count(const struct QnReport *report, size_t *out);

/*
 Copies point `index` into `out`.

 # Safety
 `report` must be a live handle; `out` must be writable.
 */
enum QnStatus qn_report_point(const struct QnReport *report,
                              size_t index,
                              struct QnCriticalPoint *out);

/*
 # Safety
 `report` must come from [`qn_find_equilibria`] and not have been freed, or
 be null.
 */
void qn_report_free(struct QnReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QNASH_H */

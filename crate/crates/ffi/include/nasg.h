#ifndef NASG_H
#define NASG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NasgStatus {
  NASG_STATUS_OK = 0,
  NASG_STATUS_NULL_POINTER = 1,
  NASG_STATUS_INVALID_INPUT = 2,
  NASG_STATUS_PARSE = 3,
  NASG_STATUS_CAPACITY = 4,
  NASG_STATUS_SOLVER = 5,
  NASG_STATUS_OUT_OF_RANGE = 6,
  NASG_STATUS_PANIC = 7,
} NasgStatus;

typedef enum NasgFunction {
  NASG_FUNCTION_BENEFIT = 0,
  NASG_FUNCTION_COST_ATTACKER = 1,
  NASG_FUNCTION_COST_DEFENDER = 2,
} NasgFunction;

typedef enum NasgOracle {
  NASG_ORACLE_AUTO = 0,
  NASG_ORACLE_BRUTEFORCE = 1,
  NASG_ORACLE_SEPARABLE = 2,
  NASG_ORACLE_ADDITIVE = 3,
} NasgOracle;

typedef enum NasgValueFunction {
  NASG_VALUE_FUNCTION_CONNECTED_PAIRS = 0,
  NASG_VALUE_FUNCTION_LARGEST_COMPONENT = 1,
  NASG_VALUE_FUNCTION_WEIGHTED_COMPONENT_SUM = 2,
} NasgValueFunction;

typedef enum NasgSide {
  NASG_SIDE_DEFENDER = 0,
  NASG_SIDE_ATTACKER = 1,
} NasgSide;

// Game under construction: ground size, caps and three set functions.
typedef struct NasgGame NasgGame;

// Solver output with its certified best-response gaps.
typedef struct NasgReport NasgReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *nasg_last_error(void);

// Creates a game on `n` targets with all set functions zero.
//
// # Safety
// `out` must be null or valid for writing a pointer.
enum NasgStatus nasg_game_new(uintptr_t n, uintptr_t c, uintptr_t k, struct NasgGame **out);

// Parses a JSON game document.
//
// # Safety
// `json` must be null or a nul-terminated string; `out` must be null or
// valid for writing a pointer.
enum NasgStatus nasg_game_from_json(const char *json, struct NasgGame **out);

// Sets `f(mask) = value` for one of the game's set functions.
//
// # Safety
// `game` must be null or a live handle.
enum NasgStatus nasg_game_set(struct NasgGame *game,
                              enum NasgFunction which,
                              uint32_t mask,
                              double value);

// Serializes the game as JSON; free the string with [`nasg_string_free`].
//
// # Safety
// `game` must be null or a live handle; `out` must be null or valid for
// writing a pointer.
enum NasgStatus nasg_game_to_json(const struct NasgGame *game, char **out);

// # Safety
// `game` must be null or a handle not yet freed.
void nasg_game_free(struct NasgGame *game);

// Solves with the compact double oracle. `tol` is the best-response gap
// threshold; pass a negative value for the default.
//
// # Safety
// `game` must be null or a live handle; `out` must be null or valid for
// writing a pointer.
enum NasgStatus nasg_solve(const struct NasgGame *game,
                           double tol,
                           enum NasgOracle oracle,
                           struct NasgReport **out);

// Solves the expanded normal form directly.
//
// # Safety
// As for [`nasg_solve`].
enum NasgStatus nasg_solve_bruteforce(const struct NasgGame *game, struct NasgReport **out);

// Builds and solves a network game from an edge list (`nodes N` then
// `u v` lines) or a JSON graph. `param` is the exponent of
// `WEIGHTED_COMPONENT_SUM`; `theta > 0` selects the threshold cascade,
// otherwise nodes are simply removed.
//
// # Safety
// `graph` must be null or a nul-terminated string; `out` must be null or
// valid for writing a pointer.
enum NasgStatus nasg_net_solve(const char *graph,
                               enum NasgValueFunction value_fn,
                               double param,
                               double theta,
                               uintptr_t c,
                               double eps_c,
                               struct NasgReport **out);

// Game value for the attacker.
//
// # Safety
// `report` must be null or a live handle; `out` null or writable.
enum NasgStatus nasg_report_value(const struct NasgReport *report, double *out);

// # Safety
// `report` must be null or a live handle; `out` null or writable.
enum NasgStatus nasg_report_converged(const struct NasgReport *report, bool *out);

// # Safety
// `report` must be null or a live handle; `out` null or writable.
enum NasgStatus nasg_report_iterations(const struct NasgReport *report, uintptr_t *out);

// Best-response improvements left to the attacker and the defender.
//
// # Safety
// `report` must be null or a live handle; outputs null or writable.
enum NasgStatus nasg_report_gaps(const struct NasgReport *report,
                                 double *attacker,
                                 double *defender);

// Number of pure strategies in one side's mixture.
//
// # Safety
// `report` must be null or a live handle; `out` null or writable.
enum NasgStatus nasg_report_atom_count(const struct NasgReport *report,
                                       enum NasgSide side,
                                       uintptr_t *out);

// Atom `index` of one side's mixture as a bitmask and its probability.
//
// # Safety
// `report` must be null or a live handle; outputs null or writable.
enum NasgStatus nasg_report_atom(const struct NasgReport *report,
                                 enum NasgSide side,
                                 uintptr_t index,
                                 uint32_t *mask,
                                 double *prob);

// Report as the JSON document written by the command-line tool.
//
// # Safety
// `report` must be null or a live handle; `out` null or writable.
enum NasgStatus nasg_report_to_json(const struct NasgReport *report, char **out);

// # Safety
// `report` must be null or a handle not yet freed.
void nasg_report_free(struct NasgReport *report);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void nasg_string_free(char *s);

// Möbius transform of a dense table of `2^n` values indexed by bitmask.
// `values` and `out` may alias.
//
// # Safety
// Both pointers must be null or valid for `2^n` doubles.
enum NasgStatus nasg_moebius(uintptr_t n, const double *values, double *out);

// Zeta transform, the inverse of [`nasg_moebius`].
//
// # Safety
// As for [`nasg_moebius`].
enum NasgStatus nasg_zeta(uintptr_t n, const double *values, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NASG_H */

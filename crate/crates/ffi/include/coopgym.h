#ifndef COOPGYM_H
#define COOPGYM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum CgStatus {
  CG_STATUS_OK = 0,
  CG_STATUS_NULL_POINTER = 1,
  CG_STATUS_INVALID_UTF8 = 2,
  CG_STATUS_INVALID_ARGUMENT = 3,
  CG_STATUS_PARSE_FAILED = 4,
  CG_STATUS_GAME_ERROR = 5,
  CG_STATUS_NO_VALUE = 6,
  CG_STATUS_PANIC = 7,
} CgStatus;

// Game kind plus its parameters.
typedef struct CgParams CgParams;

// Result of one simulation.
typedef struct CgTranscript CgTranscript;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *cg_version(void);

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *cg_last_error_message(void);

// Releases a string returned by this library. NULL is ignored.
void cg_string_free(char *s);

// Default parameters of `game` with two groups of `group_size` players
// (0 keeps the default of 5).
enum CgStatus cg_params_new(const char *game, size_t group_size, struct CgParams **out);

// Parameters from a JSON object; omitted fields take the game's defaults.
enum CgStatus cg_params_from_json(const char *game, const char *json, struct CgParams **out);

// Total number of players, or 0 for a NULL handle.
size_t cg_params_n_players(const struct CgParams *p);

void cg_params_free(struct CgParams *p);

// Nash and Pareto anchors on the game's primary-metric scale.
enum CgStatus cg_anchors(const struct CgParams *p, double *out_nash, double *out_pareto);

// 0 at the Pareto anchor, 1 at the Nash anchor, clamped in between.
double cg_pareto_proximity(double metric, double nash, double pareto);

// Per-player payoffs of one round (or of a whole Collective Risk game).
//
// `actions` layout by game:
// - weakest_link, cpr, cpr_sanction, oring: one value per player
//   (cpr_sanction gives phase-1 payoffs, before sanctions);
// - public_goods: keep, group, global for each player in turn (3·N values);
// - collective_risk: contributions round by round (rounds·N values),
//   settled with `loss_draw` in [0, 1).
//
// `out_payoffs` must hold at least N values.
enum CgStatus cg_payoff(const struct CgParams *p,
                        const uint32_t *actions,
                        size_t n_actions,
                        double loss_draw,
                        double *out_payoffs,
                        size_t out_len);

// Parses a raw agent reply; on success `*out_json` holds the decision,
// e.g. `{"extract":5}`.
enum CgStatus cg_parse_decision(const struct CgParams *p, const char *raw, char **out_json);

// Runs one simulation described by a `SimulationConfig` JSON document,
// building each player's agent from the config's roster. Agent failures are
// reported inside the transcript, not through the status code.
enum CgStatus cg_run_simulation(const char *config_json, struct CgTranscript **out);

// True when the simulation ran to completion.
bool cg_transcript_is_completed(const struct CgTranscript *t);

// Primary metric of a completed simulation; `CG_STATUS_NO_VALUE` otherwise.
enum CgStatus cg_transcript_metric(const struct CgTranscript *t, double *out);

// The full transcript as one line of JSON.
enum CgStatus cg_transcript_to_json(const struct CgTranscript *t, char **out_json);

void cg_transcript_free(struct CgTranscript *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COOPGYM_H */

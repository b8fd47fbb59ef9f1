#ifndef TSM_H
#define TSM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TSM_API __declspec(dllexport)
#else
#define TSM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every function returning int returns one of these. */
enum {
    TSM_OK = 0,
    TSM_BUDGET_BALANCE_VIOLATION = 1,
    TSM_PRICE_OUT_OF_RANGE = 2,
    TSM_INSTANCE_TOO_LARGE = 3,
    TSM_INCONSISTENT_FEEDBACK = 4,
    TSM_NON_POSITIVE_LENGTH = 5,
    TSM_INVARIANT_VIOLATION = 6,
    TSM_NON_SINGLE_PRICE_PROFILE = 7,
    TSM_EMPTY_BODY = 8,
    TSM_DEGENERATE_DIRECTION = 9,
    TSM_CUT_MISSES_ELLIPSOID = 10,
    TSM_UNSUPPORTED_COMBINATION = 11,
    TSM_INVALID_INPUT = 12,
    TSM_INTERNAL = 100
};

enum { TSM_MATCH_ADVERSARIAL = 0, TSM_MATCH_RANDOM = 1 };
enum { TSM_OBJ_GFT = 0, TSM_OBJ_PROFIT = 1 };

typedef struct tsm_instance tsm_instance;
typedef struct tsm_profile tsm_profile;
typedef struct tsm_learner tsm_learner;
typedef struct tsm_result tsm_result;

TSM_API const char* tsm_status_name(int status);
/* Message of the last failure on the calling thread; empty if none. */
TSM_API const char* tsm_last_error(void);
TSM_API const char* tsm_version(void);

/* Markets */
TSM_API int tsm_instance_create(const double* costs, size_t m, const double* values, size_t n, tsm_instance** out);
TSM_API void tsm_instance_free(tsm_instance* inst);
TSM_API int tsm_gft_star(const tsm_instance* inst, double* out);
TSM_API int tsm_profit_star(const tsm_instance* inst, double* value, int* k);
TSM_API int tsm_efficient_trade_size(const tsm_instance* inst, int* out);

TSM_API int tsm_profile_single(double price, tsm_profile** out);
TSM_API int tsm_profile_two(double p, double q, tsm_profile** out);
TSM_API int tsm_profile_segmented(const uint8_t* seller_group, size_t m, double p1, double p2,
                                  const uint8_t* buyer_group, size_t n, double q1, double q2, tsm_profile** out);
TSM_API void tsm_profile_free(tsm_profile* prof);
TSM_API int tsm_profile_seller_price(const tsm_profile* prof, size_t i, double* out);
TSM_API int tsm_profile_buyer_price(const tsm_profile* prof, size_t j, double* out);

/* Runs one round. accept arrays (m and n bytes) and the scalars are optional outputs. */
TSM_API int tsm_apply_mechanism(const tsm_instance* inst, const tsm_profile* prof, int matching, uint64_t seed,
                                uint8_t* seller_accept, uint8_t* buyer_accept, double* gft, double* profit);

/* Learners: obs, otcs, one_to_many, segmented, fictitious_profit, steiner_gft, ellipsoid, steiner_profit.
   d = 0 for non-contextual learners. */
TSM_API int tsm_learner_create(const char* name, size_t m, size_t n, size_t d, uint64_t horizon, uint64_t seed,
                               tsm_learner** out);
TSM_API void tsm_learner_free(tsm_learner* l);
/* The returned profile is owned by the caller. */
TSM_API int tsm_learner_propose(tsm_learner* l, const double* context, size_t d, tsm_profile** out);
TSM_API int tsm_learner_observe(tsm_learner* l, const uint8_t* seller_accept, size_t m, const uint8_t* buyer_accept,
                                size_t n);
TSM_API int tsm_learner_settled(const tsm_learner* l, int* out);

/* Experiments. Config and grid are JSON documents; see README. */
TSM_API int tsm_run_json(const char* config_json, tsm_result** out);
TSM_API void tsm_result_free(tsm_result* r);
TSM_API int tsm_result_total_regret(const tsm_result* r, double* out);
TSM_API int tsm_result_invariant_violations(const tsm_result* r, uint64_t* out);
/* Pointer valid until the result is freed. */
TSM_API const char* tsm_result_summary(const tsm_result* r);
/* Any path may be NULL. The segment map needs full_log; the transcript exists for adversary runs. */
TSM_API int tsm_result_write(const tsm_result* r, const char* csv_path, const char* summary_path,
                             const char* segments_path, const char* transcript_path);

/* Writes the sweep table as CSV. threads <= 0 uses every core. failed_runs is optional. */
TSM_API int tsm_sweep_json(const char* grid_json, const char* csv_path, int threads, size_t* runs, size_t* failed_runs);

/* consistent is set to 1 when the recorded instance reproduces every recorded feedback. */
TSM_API int tsm_audit_json(const char* transcript_json, int* consistent);

#ifdef __cplusplus
}
#endif

#endif

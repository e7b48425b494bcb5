/*
 * qkd3 - three-basis entangled-pair quantum key distribution:
 * protocol simulator, key-rate analysis and security-bound certification.
 *
 * C interface of the shared library. All objects are opaque handles owned by
 * the library; every fallible call returns a qkd3_status and reports detail
 * through qkd3_last_error(). Strings returned through char** outputs are
 * heap-allocated and must be released with qkd3_string_free().
 *
 * Results are deterministic: identical inputs and seeds produce
 * byte-identical documents.
 */

#ifndef QKD3_H
#define QKD3_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QKD3_API __declspec(dllexport)
#else
#define QKD3_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qkd3_status {
    QKD3_OK = 0,
    QKD3_ERR_INVALID_ARGUMENT = 1, /* bad input or violated setup inequality */
    QKD3_ERR_NOT_FOUND = 2,        /* matrix search exhausted max_tries */
    QKD3_ERR_CHECK_FAILED = 3,     /* certification suite reported failures */
    QKD3_ERR_IO = 4,               /* file could not be read or written */
    QKD3_ERR_UNAVAILABLE = 5       /* field not defined for this record */
} qkd3_status;

typedef struct qkd3_params qkd3_params;     /* protocol setup constants */
typedef struct qkd3_strategy qkd3_strategy; /* source / eavesdropper behaviour */
typedef struct qkd3_matrix qkd3_matrix;     /* certified privacy matrix */
typedef struct qkd3_session qkd3_session;   /* one protocol run */

QKD3_API const char* qkd3_version(void);
QKD3_API const char* qkd3_status_name(qkd3_status st);

/* Detail message for the most recent failure on this thread. */
QKD3_API const char* qkd3_last_error(void);

QKD3_API void qkd3_string_free(char* s);

/* Fixed mixing function used to derive per-trial seeds in sweeps. */
QKD3_API uint64_t qkd3_mix_seed(uint64_t seed, uint64_t index);

/* ------------------------------------------------------------------ */
/* protocol parameters                                                  */

/* Derives r, s, n and d_k from the setup constants; fails with the violated
 * inequality named when the constants are infeasible. */
QKD3_API qkd3_status qkd3_params_derive(uint32_t m, double eps, double tau, double tau_s,
                                        qkd3_params** out);
QKD3_API void qkd3_params_free(qkd3_params* p);

QKD3_API uint32_t qkd3_params_m(const qkd3_params* p);
QKD3_API uint32_t qkd3_params_r(const qkd3_params* p);
QKD3_API uint32_t qkd3_params_s(const qkd3_params* p);
QKD3_API uint32_t qkd3_params_n(const qkd3_params* p);
QKD3_API double qkd3_params_eps(const qkd3_params* p);
QKD3_API double qkd3_params_tau(const qkd3_params* p);
QKD3_API double qkd3_params_tau_s(const qkd3_params* p);
QKD3_API double qkd3_params_d_k(const qkd3_params* p);

/* ------------------------------------------------------------------ */
/* source strategies                                                    */

/* Grammar: honest | intercept{bases=[0,1,2]} | belldiag{p=[p0,p1,p2,p3]} */
QKD3_API qkd3_status qkd3_strategy_parse(const char* spec, qkd3_strategy** out);
QKD3_API void qkd3_strategy_free(qkd3_strategy* s);

/* Closed-form sifted error rate of a strategy. */
QKD3_API qkd3_status qkd3_strategy_expected_error_rate(const qkd3_strategy* s, double* out);
/* Sifted error rate conditioned on the common basis, out[0..2]. */
QKD3_API qkd3_status qkd3_strategy_per_basis_error_rates(const qkd3_strategy* s, double out[3]);

/* ------------------------------------------------------------------ */
/* privacy matrices                                                     */

/* Random search over full-rank m x r matrices; every candidate is certified
 * exhaustively (requires m <= 20). The certified minimum combination weight
 * strictly exceeds d_k on success. */
QKD3_API qkd3_status qkd3_matrix_find(uint32_t m, uint32_t r, double d_k, uint64_t max_tries,
                                      uint64_t seed, qkd3_matrix** out);
/* Same search with m, r, d_k taken from derived parameters. */
QKD3_API qkd3_status qkd3_matrix_generate(const qkd3_params* p, uint64_t max_tries, uint64_t seed,
                                          qkd3_matrix** out);
QKD3_API qkd3_status qkd3_matrix_load(const char* path, qkd3_matrix** out);
QKD3_API qkd3_status qkd3_matrix_save(const qkd3_matrix* k, const char* path);
QKD3_API qkd3_status qkd3_matrix_to_text(const qkd3_matrix* k, char** out);
QKD3_API uint32_t qkd3_matrix_rows(const qkd3_matrix* k);
QKD3_API uint32_t qkd3_matrix_cols(const qkd3_matrix* k);
QKD3_API qkd3_status qkd3_matrix_min_weight(const qkd3_matrix* k, uint32_t* out);
QKD3_API void qkd3_matrix_free(qkd3_matrix* k);

/* ------------------------------------------------------------------ */
/* protocol sessions                                                    */

/* One full run: transmission, sifting, error detection, validation, oracle
 * reconciliation and privacy amplification. K must match the parameters and
 * carry a certified weight above d_k. */
QKD3_API qkd3_status qkd3_session_run(const qkd3_params* p, const qkd3_strategy* s,
                                      const qkd3_matrix* k, uint64_t seed, qkd3_session** out);
QKD3_API void qkd3_session_free(qkd3_session* rec);

QKD3_API int qkd3_session_validation_passed(const qkd3_session* rec);
QKD3_API int qkd3_session_sift_failed(const qkd3_session* rec);
/* QKD3_ERR_UNAVAILABLE when sifting failed. */
QKD3_API qkd3_status qkd3_session_error_rate(const qkd3_session* rec, double* out);
QKD3_API qkd3_status qkd3_session_error_count(const qkd3_session* rec, uint64_t* out);
/* QKD3_ERR_UNAVAILABLE unless validation passed. */
QKD3_API qkd3_status qkd3_session_net_gain_bits(const qkd3_session* rec, double* out);
QKD3_API qkd3_status qkd3_session_keys_match(const qkd3_session* rec, int* out);

/* Canonical session document. */
QKD3_API qkd3_status qkd3_session_to_json(const qkd3_session* rec, char** out);
/* Sweep CSV pieces; extra_column/extra_value may be NULL or empty. */
QKD3_API qkd3_status qkd3_session_csv_header(const char* extra_column, char** out);
QKD3_API qkd3_status qkd3_session_csv_row(const qkd3_session* rec, uint64_t trial,
                                          const char* extra_value, char** out);

/* ------------------------------------------------------------------ */
/* analysis scalars                                                     */

QKD3_API qkd3_status qkd3_binary_entropy(double p, double* out);
QKD3_API qkd3_status qkd3_shannon_rate_bound(double eps, double tau, double* out);
QKD3_API qkd3_status qkd3_theta(double r, double tau, double* out);
QKD3_API qkd3_status qkd3_entropy_lower_bound(double m, double r, double tau, double* out);
/* bases must be 2 or 3. */
QKD3_API qkd3_status qkd3_net_gain(int bases, double eps, double* out);
QKD3_API qkd3_status qkd3_solve_threshold(int bases, double* out);
QKD3_API qkd3_status qkd3_binomial_tail(int n, double p, double t, double* out);

/* ------------------------------------------------------------------ */
/* reports                                                              */

/* CSV table "eps,gain2,gain3" over the grid plus a trailing row
 * "threshold,<two-basis root>,<three-basis root>". */
QKD3_API qkd3_status qkd3_threshold_report_csv(double eps_min, double eps_max, double eps_step,
                                               char** out);

/* Runs the certification suite (operator bounds, identities, analysis
 * properties). JSON report in *out_json; *all_pass set to 0/1. Returns
 * QKD3_ERR_CHECK_FAILED when checks fail (the report is still produced).
 * perturb != 0 corrupts one Bell amplitude sign to prove the harness can
 * fail. max_pairs selects the operator grid size (1..5, default 4). */
QKD3_API qkd3_status qkd3_verify_run(uint32_t max_pairs, int perturb, uint64_t seed,
                                     char** out_json, int* all_pass);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* QKD3_H */

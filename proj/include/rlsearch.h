/*
 * rlsearch C API: routing instances, improvement-search policies, training
 * and benchmarking behind opaque handles.
 *
 * Every function returns RLS_OK (0) or an rls_status error code; the message
 * for the calling thread's most recent failure is available through
 * rls_last_error(). Handles are created by *_create/_load/_generate calls and
 * released with the matching *_free.
 */
#ifndef RLSEARCH_H
#define RLSEARCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RLS_API __declspec(dllexport)
#else
#define RLS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rls_status {
  RLS_OK = 0,
  RLS_ERR_INVALID_ARGUMENT = 1,
  RLS_ERR_INFEASIBLE = 2,
  RLS_ERR_DEGENERATE_ACTION = 3,
  RLS_ERR_MASKED_ACTION = 4,
  RLS_ERR_NO_FEASIBLE_ACTION = 5,
  RLS_ERR_PARSE = 6,
  RLS_ERR_UNSUPPORTED_FORMAT = 7,
  RLS_ERR_IO = 8,
  RLS_ERR_NUMERIC = 9,
  RLS_ERR_UNKNOWN = 10
} rls_status;

typedef enum rls_problem { RLS_PROBLEM_TSP = 0, RLS_PROBLEM_CVRP = 1 } rls_problem;

typedef enum rls_operator {
  RLS_OP_TWO_OPT = 0,
  RLS_OP_NODE_SWAP = 1,
  RLS_OP_RELOCATION = 2
} rls_operator;

typedef enum rls_policy_type {
  RLS_POLICY_LEARNED = 0,
  RLS_POLICY_FIRST_IMPROVEMENT = 1,
  RLS_POLICY_BEST_IMPROVEMENT = 2
} rls_policy_type;

typedef enum rls_initial {
  RLS_INITIAL_DEFAULT = -1, /* random for TSP, nearest insertion for CVRP */
  RLS_INITIAL_RANDOM = 0,
  RLS_INITIAL_NEAREST_INSERTION = 1
} rls_initial;

typedef struct rls_instance rls_instance;
typedef struct rls_solution rls_solution;
typedef struct rls_policy rls_policy;
typedef struct rls_results rls_results;

RLS_API const char* rls_version(void);
RLS_API const char* rls_status_name(int status);
RLS_API const char* rls_last_error(void);

/* ---- instances ------------------------------------------------------- */

/* Synthetic instance: unit-square coordinates; CVRP demands in 1..9 with the
 * 30/40/50 capacity rule when capacity is 0. */
RLS_API int rls_instance_generate(int problem, int n, int capacity, uint64_t seed, rls_instance** out);

/* Reads .json (native), .tsp (TSPLIB) or .vrp (CVRPLIB) files. Benchmark
 * files use the rounded Euclidean metric. */
RLS_API int rls_instance_load(const char* path, rls_instance** out);
RLS_API int rls_instance_save(const rls_instance* inst, const char* path);

RLS_API int rls_instance_kind(const rls_instance* inst);
RLS_API int rls_instance_customers(const rls_instance* inst);
RLS_API int rls_instance_locations(const rls_instance* inst);
RLS_API int rls_instance_capacity(const rls_instance* inst);
/* Copies the instance label; returns the full length (snprintf-style). */
RLS_API int rls_instance_id(const rls_instance* inst, char* buf, size_t buflen);
/* Known reference optimum for named benchmark instances; RLS_ERR_INVALID_ARGUMENT when none. */
RLS_API int rls_instance_known_optimum(const rls_instance* inst, double* out);
RLS_API void rls_instance_free(rls_instance* inst);

/* ---- solutions ------------------------------------------------------- */

RLS_API int rls_solution_initial(const rls_instance* inst, int initial_kind, int padded_len, uint64_t seed,
                                 rls_solution** out);
RLS_API int rls_solution_from_seq(const rls_instance* inst, const int* seq, int len, rls_solution** out);
RLS_API int rls_solution_len(const rls_solution* sol);
RLS_API int rls_solution_seq(const rls_solution* sol, int* buf, int buflen);
RLS_API int rls_solution_cost(const rls_instance* inst, const rls_solution* sol, double* out);
RLS_API void rls_solution_free(rls_solution* sol);

/* ---- policies (network checkpoints) ---------------------------------- */

RLS_API int rls_policy_init(int problem, int d_model, uint64_t seed, rls_policy** out);
RLS_API int rls_policy_load(const char* path, rls_policy** out);
RLS_API int rls_policy_save(const rls_policy* policy, const char* path);
RLS_API int rls_policy_problem(const rls_policy* policy);
RLS_API int rls_policy_epoch(const rls_policy* policy);
RLS_API void rls_policy_free(rls_policy* policy);

/* ---- solving ---------------------------------------------------------- */

typedef struct rls_solve_options {
  int policy_type;  /* rls_policy_type */
  int op;           /* rls_operator */
  long step_limit;
  uint64_t seed;
  int runs;         /* independent multi-run count, >= 1 */
  int initial_kind; /* rls_initial; used when no initial solution is given */
  int padded_len;   /* 0 = default for the problem size */
} rls_solve_options;
RLS_API void rls_solve_options_default(rls_solve_options* opts);

typedef struct rls_solve_stats {
  double best_cost;
  double initial_cost;
  long restarts;
  double runtime_ms;
} rls_solve_stats;

typedef int (*rls_trace_fn)(long step, double current_cost, double incumbent_cost, void* user);

/* policy is required for RLS_POLICY_LEARNED and ignored otherwise. initial
 * may be NULL, in which case opts->initial_kind derives one from the seed.
 * trace_cb (optional) receives every step of the best run. */
RLS_API int rls_solve(const rls_instance* inst, const rls_solution* initial, const rls_policy* policy,
                      const rls_solve_options* opts, rls_trace_fn trace_cb, void* trace_user, rls_solution** best,
                      rls_solve_stats* stats);

/* Best single run across several checkpoints (late-epoch ensembles). */
RLS_API int rls_solve_multi_policy(const rls_instance* inst, const rls_solution* initial,
                                   const rls_policy* const* policies, int npolicies, const rls_solve_options* opts,
                                   rls_solution** best, rls_solve_stats* stats);

/* ---- training --------------------------------------------------------- */

typedef struct rls_train_options {
  int problem;
  int n;
  int capacity;    /* 0 = size rule */
  int padded_len;  /* 0 = default */
  int epochs;
  int instances_per_epoch;
  int batches;
  long t_train;
  int n_step;
  double gamma;
  double lr;
  double lr_decay;
  int d_model;
  int op;           /* rls_operator */
  int initial_kind; /* rls_initial */
  uint64_t seed;
  int jobs;                /* 0 = hardware concurrency */
  int retain_checkpoints;  /* 0 = keep all */
  int center_advantages;   /* subtract the batch-mean advantage in actor updates */
} rls_train_options;

/* Reference hyperparameters for the problem size (epochs 200, lr 1e-4
 * decaying 0.99; TSP: 10240x10 instances, T 200, n 4, gamma 0.99; CVRP:
 * 3840x10, T 360/480, n 10/12, gamma 0.996). */
RLS_API void rls_train_options_default(rls_train_options* opts, int problem, int n);

typedef int (*rls_train_log_fn)(int epoch, int batch, double mean_reward, double mean_incumbent_cost, double lr,
                                double wall_ms, void* user);

/* Writes per-epoch checkpoints and train_log.csv under out_dir (optional);
 * returns the final policy through final_policy (optional). */
RLS_API int rls_train(const rls_train_options* opts, const char* out_dir, rls_train_log_fn log_cb, void* log_user,
                      rls_policy** final_policy);

/* ---- verification ------------------------------------------------------ */

/* Finite-difference check of all actor/critic gradients at the given width;
 * writes the max relative error. inject_fault flips one analytic component
 * so the harness provably fails. */
RLS_API int rls_gradcheck(int problem, int d_model, int length, uint64_t seed, int inject_fault, double* max_rel_err);

/* Held-Karp exact TSP optimum, n <= 13. tour_buf (optional) receives the
 * optimal tour when buflen >= n. */
RLS_API int rls_exact_tsp(const rls_instance* inst, double* cost, int* tour_buf, int buflen);

/* ---- results files ----------------------------------------------------- */

RLS_API int rls_results_open(const char* path, rls_results** out);
/* ref: pass NaN when no reference optimum is known. */
RLS_API int rls_results_append(rls_results* results, const char* instance_id, const char* method, long steps,
                               uint64_t seed, double cost, double ref, double runtime_ms);
/* Flushes and frees the handle. */
RLS_API int rls_results_close(rls_results* results);

#ifdef __cplusplus
}
#endif

#endif /* RLSEARCH_H */

#include "rlsearch.h"

#include <chrono>
#include <cmath>
#include <cstring>
#include <optional>
#include <string>

#include "rlsearch/checkpoint.hpp"
#include "rlsearch/error.hpp"
#include "rlsearch/exact.hpp"
#include "rlsearch/generator.hpp"
#include "rlsearch/results.hpp"
#include "rlsearch/search.hpp"
#include "rlsearch/trainer.hpp"
#include "rlsearch/tsplib.hpp"

struct rls_instance {
  rls::instance inst;
  std::optional<double> known_opt;
};

struct rls_solution {
  rls::solution sol;
};

struct rls_policy {
  rls::checkpoint ckpt;
};

struct rls_results {
  rls::results_writer writer;
};

namespace {

thread_local std::string g_last_error;

int to_status(rls::errc code) {
  switch (code) {
    case rls::errc::invalid_argument: return RLS_ERR_INVALID_ARGUMENT;
    case rls::errc::infeasible_solution: return RLS_ERR_INFEASIBLE;
    case rls::errc::degenerate_action: return RLS_ERR_DEGENERATE_ACTION;
    case rls::errc::masked_action: return RLS_ERR_MASKED_ACTION;
    case rls::errc::no_feasible_action: return RLS_ERR_NO_FEASIBLE_ACTION;
    case rls::errc::parse_error: return RLS_ERR_PARSE;
    case rls::errc::unsupported_format: return RLS_ERR_UNSUPPORTED_FORMAT;
    case rls::errc::io_error: return RLS_ERR_IO;
    case rls::errc::numeric_error: return RLS_ERR_NUMERIC;
  }
  return RLS_ERR_UNKNOWN;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return RLS_OK;
  } catch (const rls::error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RLS_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown failure";
    return RLS_ERR_UNKNOWN;
  }
}

int require(bool ok, const char* what) {
  if (ok) return RLS_OK;
  g_last_error = what;
  return RLS_ERR_INVALID_ARGUMENT;
}

rls::problem_kind to_kind(int problem) {
  if (problem != RLS_PROBLEM_TSP && problem != RLS_PROBLEM_CVRP) {
    rls::fail(rls::errc::invalid_argument, "bad problem kind");
  }
  return problem == RLS_PROBLEM_TSP ? rls::problem_kind::tsp : rls::problem_kind::cvrp;
}

rls::operator_kind to_op(int op) {
  switch (op) {
    case RLS_OP_TWO_OPT: return rls::operator_kind::two_opt;
    case RLS_OP_NODE_SWAP: return rls::operator_kind::node_swap;
    case RLS_OP_RELOCATION: return rls::operator_kind::relocation;
  }
  rls::fail(rls::errc::invalid_argument, "bad operator kind");
}

std::optional<rls::initial_kind> to_initial(int initial) {
  switch (initial) {
    case RLS_INITIAL_DEFAULT: return std::nullopt;
    case RLS_INITIAL_RANDOM: return rls::initial_kind::random_start;
    case RLS_INITIAL_NEAREST_INSERTION: return rls::initial_kind::nearest_insertion_start;
  }
  rls::fail(rls::errc::invalid_argument, "bad initial kind");
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

rls::solution derive_initial(const rls::instance& inst, const rls_solve_options& opts) {
  const rls::initial_kind init = to_initial(opts.initial_kind).value_or(rls::default_initial(inst.kind()));
  const int padded = inst.kind() == rls::problem_kind::cvrp
                         ? (opts.padded_len > 0 ? opts.padded_len : rls::default_padded_len(inst.n_customers()))
                         : 0;
  rls::rng init_rng = rls::rng(opts.seed).fork(0x5EED);
  return rls::make_initial(inst, init, padded, init_rng);
}

}  // namespace

const char* rls_version(void) { return "rlsearch 1.0.0"; }

const char* rls_status_name(int status) {
  switch (status) {
    case RLS_OK: return "ok";
    case RLS_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case RLS_ERR_INFEASIBLE: return "infeasible-solution";
    case RLS_ERR_DEGENERATE_ACTION: return "degenerate-action";
    case RLS_ERR_MASKED_ACTION: return "masked-action";
    case RLS_ERR_NO_FEASIBLE_ACTION: return "no-feasible-action";
    case RLS_ERR_PARSE: return "parse-error";
    case RLS_ERR_UNSUPPORTED_FORMAT: return "unsupported-format";
    case RLS_ERR_IO: return "io-error";
    case RLS_ERR_NUMERIC: return "numeric-error";
  }
  return "unknown-error";
}

const char* rls_last_error(void) { return g_last_error.c_str(); }

/* ---- instances --------------------------------------------------------- */

int rls_instance_generate(int problem, int n, int capacity, uint64_t seed, rls_instance** out) {
  if (const int rc = require(out != nullptr, "null output pointer")) return rc;
  return guarded([&] {
    rls::generator_spec spec{to_kind(problem), n, capacity, seed};
    *out = new rls_instance{rls::generate(spec), std::nullopt};
  });
}

int rls_instance_load(const char* path, rls_instance** out) {
  if (const int rc = require(out != nullptr && path != nullptr, "null argument")) return rc;
  return guarded([&] {
    rls::instance inst = rls::load_instance(path);
    std::optional<double> known = rls::known_optimum(inst.id);
    *out = new rls_instance{std::move(inst), known};
  });
}

int rls_instance_save(const rls_instance* inst, const char* path) {
  if (const int rc = require(inst != nullptr && path != nullptr, "null argument")) return rc;
  return guarded([&] { rls::save_instance(inst->inst, path); });
}

int rls_instance_kind(const rls_instance* inst) {
  return inst != nullptr && inst->inst.kind() == rls::problem_kind::cvrp ? RLS_PROBLEM_CVRP : RLS_PROBLEM_TSP;
}

int rls_instance_customers(const rls_instance* inst) { return inst == nullptr ? 0 : inst->inst.n_customers(); }

int rls_instance_locations(const rls_instance* inst) { return inst == nullptr ? 0 : inst->inst.n_locations(); }

int rls_instance_capacity(const rls_instance* inst) { return inst == nullptr ? 0 : inst->inst.capacity(); }

int rls_instance_id(const rls_instance* inst, char* buf, size_t buflen) {
  if (inst == nullptr) return 0;
  const std::string& id = inst->inst.id;
  if (buf != nullptr && buflen > 0) {
    const size_t n = std::min(buflen - 1, id.size());
    std::memcpy(buf, id.data(), n);
    buf[n] = '\0';
  }
  return static_cast<int>(id.size());
}

int rls_instance_known_optimum(const rls_instance* inst, double* out) {
  if (const int rc = require(inst != nullptr && out != nullptr, "null argument")) return rc;
  if (!inst->known_opt) {
    g_last_error = "no known optimum for this instance";
    return RLS_ERR_INVALID_ARGUMENT;
  }
  *out = *inst->known_opt;
  return RLS_OK;
}

void rls_instance_free(rls_instance* inst) { delete inst; }

/* ---- solutions ---------------------------------------------------------- */

int rls_solution_initial(const rls_instance* inst, int initial_kind, int padded_len, uint64_t seed,
                         rls_solution** out) {
  if (const int rc = require(inst != nullptr && out != nullptr, "null argument")) return rc;
  return guarded([&] {
    const rls::initial_kind init = to_initial(initial_kind).value_or(rls::default_initial(inst->inst.kind()));
    const int padded =
        inst->inst.kind() == rls::problem_kind::cvrp
            ? (padded_len > 0 ? padded_len : rls::default_padded_len(inst->inst.n_customers()))
            : 0;
    rls::rng r(seed);
    *out = new rls_solution{rls::make_initial(inst->inst, init, padded, r)};
  });
}

int rls_solution_from_seq(const rls_instance* inst, const int* seq, int len, rls_solution** out) {
  if (const int rc = require(inst != nullptr && seq != nullptr && out != nullptr && len > 0, "null argument")) return rc;
  return guarded([&] {
    rls::solution sol;
    sol.seq.assign(seq, seq + len);
    const rls::feasibility_report rep = rls::check_feasible(inst->inst, sol);
    if (!rep.ok) rls::fail(rls::errc::infeasible_solution, "infeasible-solution: " + rep.violation);
    *out = new rls_solution{std::move(sol)};
  });
}

int rls_solution_len(const rls_solution* sol) { return sol == nullptr ? 0 : sol->sol.size(); }

int rls_solution_seq(const rls_solution* sol, int* buf, int buflen) {
  if (sol == nullptr || buf == nullptr) return 0;
  const int n = std::min(buflen, sol->sol.size());
  std::memcpy(buf, sol->sol.seq.data(), static_cast<size_t>(n) * sizeof(int));
  return n;
}

int rls_solution_cost(const rls_instance* inst, const rls_solution* sol, double* out) {
  if (const int rc = require(inst != nullptr && sol != nullptr && out != nullptr, "null argument")) return rc;
  return guarded([&] { *out = rls::tour_length(inst->inst, sol->sol); });
}

void rls_solution_free(rls_solution* sol) { delete sol; }

/* ---- policies ----------------------------------------------------------- */

int rls_policy_init(int problem, int d_model, uint64_t seed, rls_policy** out) {
  if (const int rc = require(out != nullptr, "null output pointer")) return rc;
  return guarded([&] {
    *out = new rls_policy{rls::make_checkpoint(rls::net_config::for_kind(to_kind(problem), d_model), seed)};
  });
}

int rls_policy_load(const char* path, rls_policy** out) {
  if (const int rc = require(out != nullptr && path != nullptr, "null argument")) return rc;
  return guarded([&] { *out = new rls_policy{rls::load_checkpoint(path)}; });
}

int rls_policy_save(const rls_policy* policy, const char* path) {
  if (const int rc = require(policy != nullptr && path != nullptr, "null argument")) return rc;
  return guarded([&] { rls::save_checkpoint(policy->ckpt, path); });
}

int rls_policy_problem(const rls_policy* policy) {
  return policy != nullptr && policy->ckpt.config.kind == rls::problem_kind::cvrp ? RLS_PROBLEM_CVRP
                                                                                  : RLS_PROBLEM_TSP;
}

int rls_policy_epoch(const rls_policy* policy) {
  return policy == nullptr ? 0 : static_cast<int>(policy->ckpt.epoch);
}

void rls_policy_free(rls_policy* policy) { delete policy; }

/* ---- solving -------------------------------------------------------------- */

void rls_solve_options_default(rls_solve_options* opts) {
  if (opts == nullptr) return;
  opts->policy_type = RLS_POLICY_BEST_IMPROVEMENT;
  opts->op = RLS_OP_TWO_OPT;
  opts->step_limit = 1000;
  opts->seed = 0;
  opts->runs = 1;
  opts->initial_kind = RLS_INITIAL_DEFAULT;
  opts->padded_len = 0;
}

namespace {

rls::policy_kind to_policy(int type) {
  switch (type) {
    case RLS_POLICY_LEARNED: return rls::policy_kind::learned;
    case RLS_POLICY_FIRST_IMPROVEMENT: return rls::policy_kind::first_improvement;
    case RLS_POLICY_BEST_IMPROVEMENT: return rls::policy_kind::best_improvement;
  }
  rls::fail(rls::errc::invalid_argument, "bad policy type");
}

void fill_stats(const rls::run_result& res, double started_ms, rls_solve_stats* stats) {
  if (stats == nullptr) return;
  stats->best_cost = res.best_cost;
  stats->initial_cost = res.initial_cost;
  stats->restarts = res.restarts;
  stats->runtime_ms = now_ms() - started_ms;
}

}  // namespace

int rls_solve(const rls_instance* inst, const rls_solution* initial, const rls_policy* policy,
              const rls_solve_options* opts, rls_trace_fn trace_cb, void* trace_user, rls_solution** best,
              rls_solve_stats* stats) {
  if (const int rc = require(inst != nullptr && opts != nullptr && best != nullptr, "null argument")) return rc;
  return guarded([&] {
    const double started = now_ms();
    rls::policy_spec spec;
    spec.kind = to_policy(opts->policy_type);
    if (spec.kind == rls::policy_kind::learned) {
      if (policy == nullptr) rls::fail(rls::errc::invalid_argument, "learned policy needs a checkpoint handle");
      spec.ckpt = &policy->ckpt;
    }
    rls::run_options ropts;
    ropts.op = to_op(opts->op);
    ropts.step_limit = opts->step_limit;
    ropts.record_trace = trace_cb != nullptr;

    const rls::solution start = initial != nullptr ? initial->sol : derive_initial(inst->inst, *opts);
    const rls::rng base(opts->seed);
    rls::run_result res = opts->runs <= 1
                              ? [&] {
                                  rls::rng stream = base.fork(0);
                                  return rls::run_improvement(inst->inst, start, spec, ropts, stream);
                                }()
                              : rls::multi_run(inst->inst, start, spec, ropts, opts->runs, base);
    if (trace_cb != nullptr) {
      for (const auto& row : res.trace) {
        if (trace_cb(row.step, row.current_cost, row.incumbent_cost, trace_user) != 0) break;
      }
    }
    fill_stats(res, started, stats);
    *best = new rls_solution{std::move(res.best)};
  });
}

int rls_solve_multi_policy(const rls_instance* inst, const rls_solution* initial, const rls_policy* const* policies,
                           int npolicies, const rls_solve_options* opts, rls_solution** best, rls_solve_stats* stats) {
  if (const int rc =
          require(inst != nullptr && policies != nullptr && npolicies > 0 && opts != nullptr && best != nullptr,
                  "null argument")) {
    return rc;
  }
  return guarded([&] {
    const double started = now_ms();
    std::vector<const rls::checkpoint*> ckpts;
    for (int k = 0; k < npolicies; ++k) {
      if (policies[k] == nullptr) rls::fail(rls::errc::invalid_argument, "null policy handle");
      ckpts.push_back(&policies[k]->ckpt);
    }
    rls::run_options ropts;
    ropts.op = to_op(opts->op);
    ropts.step_limit = opts->step_limit;
    const rls::solution start = initial != nullptr ? initial->sol : derive_initial(inst->inst, *opts);
    rls::run_result res = rls::multi_policy(inst->inst, start, ckpts, ropts, rls::rng(opts->seed));
    fill_stats(res, started, stats);
    *best = new rls_solution{std::move(res.best)};
  });
}

/* ---- training -------------------------------------------------------------- */

void rls_train_options_default(rls_train_options* opts, int problem, int n) {
  if (opts == nullptr) return;
  std::memset(opts, 0, sizeof(*opts));
  opts->problem = problem;
  opts->n = n;
  opts->epochs = 200;
  opts->lr = 1e-4;
  opts->lr_decay = 0.99;
  opts->d_model = 128;
  opts->op = RLS_OP_TWO_OPT;
  opts->initial_kind = RLS_INITIAL_DEFAULT;
  opts->retain_checkpoints = 8;
  if (problem == RLS_PROBLEM_CVRP) {
    opts->instances_per_epoch = 3840;
    opts->batches = 10;
    opts->gamma = 0.996;
    opts->t_train = n <= 20 ? 360 : 480;
    opts->n_step = n <= 20 ? 10 : 12;
  } else {
    opts->instances_per_epoch = 10240;
    opts->batches = 10;
    opts->gamma = 0.99;
    opts->t_train = 200;
    opts->n_step = 4;
  }
}

int rls_train(const rls_train_options* opts, const char* out_dir, rls_train_log_fn log_cb, void* log_user,
              rls_policy** final_policy) {
  if (const int rc = require(opts != nullptr, "null options")) return rc;
  return guarded([&] {
    rls::train_config cfg;
    cfg.kind = to_kind(opts->problem);
    cfg.n = opts->n;
    cfg.capacity = opts->capacity;
    cfg.padded_len = opts->padded_len;
    cfg.epochs = opts->epochs;
    cfg.instances_per_epoch = opts->instances_per_epoch;
    cfg.batches = opts->batches;
    cfg.t_train = opts->t_train;
    cfg.n_step = opts->n_step;
    cfg.gamma = opts->gamma;
    cfg.lr = opts->lr;
    cfg.lr_decay = opts->lr_decay;
    cfg.d_model = opts->d_model;
    cfg.op = to_op(opts->op);
    cfg.init = to_initial(opts->initial_kind);
    cfg.seed = opts->seed;
    cfg.jobs = opts->jobs;
    cfg.out_dir = out_dir != nullptr ? out_dir : "";
    cfg.retain_checkpoints = opts->retain_checkpoints;
    cfg.center_advantages = opts->center_advantages != 0;

    rls::train_log_fn log;
    if (log_cb != nullptr) {
      log = [log_cb, log_user](const rls::train_batch_stats& s) {
        log_cb(s.epoch, s.batch, s.mean_reward, s.mean_incumbent_cost, s.lr, s.wall_ms, log_user);
      };
    }
    rls::train_result res = rls::train(cfg, log);
    if (final_policy != nullptr) *final_policy = new rls_policy{std::move(res.final)};
  });
}

/* ---- verification ------------------------------------------------------------ */

int rls_gradcheck(int problem, int d_model, int length, uint64_t seed, int inject_fault, double* max_rel_err) {
  if (const int rc = require(max_rel_err != nullptr, "null output pointer")) return rc;
  return guarded(
      [&] { *max_rel_err = rls::gradient_check(to_kind(problem), d_model, length, seed, inject_fault != 0); });
}

int rls_exact_tsp(const rls_instance* inst, double* cost, int* tour_buf, int buflen) {
  if (const int rc = require(inst != nullptr && cost != nullptr, "null argument")) return rc;
  return guarded([&] {
    const rls::exact_result res = rls::exact_tsp(inst->inst);
    *cost = res.cost;
    if (tour_buf != nullptr && buflen >= static_cast<int>(res.tour.size())) {
      std::memcpy(tour_buf, res.tour.data(), res.tour.size() * sizeof(int));
    }
  });
}

/* ---- results files ------------------------------------------------------------ */

int rls_results_open(const char* path, rls_results** out) {
  if (const int rc = require(path != nullptr && out != nullptr, "null argument")) return rc;
  return guarded([&] { *out = new rls_results{rls::results_writer(path)}; });
}

int rls_results_append(rls_results* results, const char* instance_id, const char* method, long steps, uint64_t seed,
                       double cost, double ref, double runtime_ms) {
  if (const int rc =
          require(results != nullptr && instance_id != nullptr && method != nullptr, "null argument")) {
    return rc;
  }
  return guarded([&] {
    rls::result_record rec;
    rec.instance_id = instance_id;
    rec.method = method;
    rec.steps = steps;
    rec.seed = seed;
    rec.cost = cost;
    if (!std::isnan(ref)) rec.ref = ref;
    rec.runtime_ms = runtime_ms;
    results->writer.append(rec);
  });
}

int rls_results_close(rls_results* results) {
  if (results == nullptr) return RLS_OK;
  const int rc = guarded([&] { results->writer.close(); });
  delete results;
  return rc;
}

// rlsearch command line: instance generation, policy training, solving,
// benchmarking and gradient verification on top of the C API.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlsearch.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(int status) {
  switch (status) {
    case RLS_OK: return kExitOk;
    case RLS_ERR_INVALID_ARGUMENT: return kExitConfig;
    case RLS_ERR_PARSE:
    case RLS_ERR_UNSUPPORTED_FORMAT:
    case RLS_ERR_IO:
    case RLS_ERR_INFEASIBLE: return kExitData;
    default: return kExitNumeric;
  }
}

[[noreturn]] void die(int status, const std::string& context) {
  std::cerr << "error (" << rls_status_name(status) << "): " << context;
  const std::string detail = rls_last_error();
  if (!detail.empty()) std::cerr << ": " << detail;
  std::cerr << "\n";
  std::exit(exit_code_for(status));
}

void check(int status, const std::string& context) {
  if (status != RLS_OK) die(status, context);
}

std::string default_out_root() {
  const char* env = std::getenv("RLSEARCH_DATA_DIR");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string("runs");
}

void write_manifest(const fs::path& dir, const std::string& subcommand, const json& config) {
  fs::create_directories(dir);
  json manifest;
  manifest["tool"] = "rlsearch";
  manifest["version"] = rls_version();
  manifest["subcommand"] = subcommand;
  manifest["config"] = config;
  std::ofstream out(dir / "manifest.json");
  if (!out) die(RLS_ERR_IO, "cannot write manifest in " + dir.string());
  out << manifest.dump(2) << "\n";
}

int parse_problem(const std::string& kind) {
  if (kind == "tsp") return RLS_PROBLEM_TSP;
  if (kind == "cvrp") return RLS_PROBLEM_CVRP;
  die(RLS_ERR_INVALID_ARGUMENT, "unknown problem kind " + kind);
}

int parse_operator(const std::string& op) {
  if (op == "2-opt" || op == "two-opt") return RLS_OP_TWO_OPT;
  if (op == "swap") return RLS_OP_NODE_SWAP;
  if (op == "relocation") return RLS_OP_RELOCATION;
  die(RLS_ERR_INVALID_ARGUMENT, "unknown operator " + op);
}

int parse_initial(const std::string& init) {
  if (init == "default") return RLS_INITIAL_DEFAULT;
  if (init == "random") return RLS_INITIAL_RANDOM;
  if (init == "nearest-insertion") return RLS_INITIAL_NEAREST_INSERTION;
  die(RLS_ERR_INVALID_ARGUMENT, "unknown initial solution kind " + init);
}

std::string instance_id(rls_instance* inst) {
  char buf[256];
  rls_instance_id(inst, buf, sizeof(buf));
  return buf;
}

struct owned_instance {
  rls_instance* handle = nullptr;
  std::string id;
  std::optional<double> ref;

  owned_instance() = default;
  owned_instance(owned_instance&& other) noexcept
      : handle(other.handle), id(std::move(other.id)), ref(other.ref) {
    other.handle = nullptr;
  }
  owned_instance& operator=(owned_instance&& other) noexcept {
    std::swap(handle, other.handle);
    id = std::move(other.id);
    ref = other.ref;
    return *this;
  }
  owned_instance(const owned_instance&) = delete;
  owned_instance& operator=(const owned_instance&) = delete;
  ~owned_instance() { rls_instance_free(handle); }
};

// Known optimum if listed, else the Held-Karp optimum for small TSP.
std::optional<double> reference_for(rls_instance* inst) {
  double opt = 0;
  if (rls_instance_known_optimum(inst, &opt) == RLS_OK) return opt;
  if (rls_instance_kind(inst) == RLS_PROBLEM_TSP && rls_instance_locations(inst) <= 13) {
    if (rls_exact_tsp(inst, &opt, nullptr, 0) == RLS_OK) return opt;
  }
  return std::nullopt;
}

// Instance set from files and/or the generator.
struct instance_source {
  std::vector<std::string> files;
  std::string gen_kind;
  int gen_n = 20;
  int gen_count = 0;
  int gen_capacity = 0;
  uint64_t gen_seed = 0;
};

std::vector<owned_instance> load_instances(const instance_source& src) {
  std::vector<owned_instance> out;
  for (const auto& file : src.files) {
    owned_instance inst;
    check(rls_instance_load(file.c_str(), &inst.handle), "load " + file);
    inst.id = instance_id(inst.handle);
    inst.ref = reference_for(inst.handle);
    out.push_back(std::move(inst));
  }
  const int problem = src.gen_count > 0 ? parse_problem(src.gen_kind) : RLS_PROBLEM_TSP;
  for (int k = 0; k < src.gen_count; ++k) {
    owned_instance inst;
    check(rls_instance_generate(problem, src.gen_n, src.gen_capacity, src.gen_seed + static_cast<uint64_t>(k),
                                &inst.handle),
          "generate instance");
    inst.id = instance_id(inst.handle);
    inst.ref = reference_for(inst.handle);
    out.push_back(std::move(inst));
  }
  if (out.empty()) die(RLS_ERR_INVALID_ARGUMENT, "no instances: pass --instance files or --gen-count");
  return out;
}

void run_parallel(int count, int jobs, const std::function<void(int)>& body) {
  if (jobs <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    jobs = hw == 0 ? 1 : static_cast<int>(hw);
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const auto drain = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
  };
  for (int w = 1; w < std::min(jobs, count); ++w) pool.emplace_back(drain);
  drain();
  for (auto& t : pool) t.join();
}

struct solve_row {
  std::string id;
  std::string method;
  long steps = 0;
  uint64_t seed = 0;
  double cost = 0;
  double ref = NAN;
  double runtime_ms = 0;
};

void append_rows(rls_results* results, const std::vector<solve_row>& rows) {
  for (const auto& row : rows) {
    check(rls_results_append(results, row.id.c_str(), row.method.c_str(), row.steps, row.seed, row.cost, row.ref,
                             row.runtime_ms),
          "append result row");
  }
}

// ---- gen ------------------------------------------------------------------

struct gen_args {
  std::string kind = "tsp";
  int n = 20;
  int count = 1;
  int capacity = 0;
  uint64_t seed = 0;
  std::string format = "json";
  std::string out;
};

int cmd_gen(const gen_args& args) {
  const int problem = parse_problem(args.kind);
  if (args.count < 1) die(RLS_ERR_INVALID_ARGUMENT, "--count must be >= 1");
  const fs::path dir = args.out.empty() ? fs::path(default_out_root()) / "gen" : fs::path(args.out);
  fs::create_directories(dir);

  std::vector<std::string> files;
  for (int k = 0; k < args.count; ++k) {
    rls_instance* inst = nullptr;
    check(rls_instance_generate(problem, args.n, args.capacity, args.seed + static_cast<uint64_t>(k), &inst),
          "generate instance");
    const std::string ext = args.format == "json" ? ".json" : (problem == RLS_PROBLEM_TSP ? ".tsp" : ".vrp");
    const fs::path path = dir / (instance_id(inst) + ext);
    check(rls_instance_save(inst, path.string().c_str()), "save " + path.string());
    files.push_back(path.filename().string());
    rls_instance_free(inst);
  }

  write_manifest(dir, "gen",
                 json{{"kind", args.kind},
                      {"n", args.n},
                      {"count", args.count},
                      {"capacity", args.capacity},
                      {"seed", args.seed},
                      {"format", args.format},
                      {"out", dir.string()},
                      {"files", files}});
  std::cout << "wrote " << args.count << " instance(s) to " << dir.string() << "\n";
  return kExitOk;
}

// ---- train ------------------------------------------------------------------

struct train_args {
  std::string kind = "tsp";
  int n = 20;
  int epochs = -1;
  int instances = -1;
  int batches = -1;
  long t_train = -1;
  int n_step = -1;
  double gamma = -1;
  double lr = -1;
  double lr_decay = -1;
  int d_model = -1;
  std::string op = "2-opt";
  std::string init = "default";
  int capacity = 0;
  int padded_len = 0;
  uint64_t seed = 0;
  int jobs = 0;
  int retain = -1;
  int scale = 1;
  bool center_advantages = false;
  std::string out;
  bool quiet = false;
};

int cmd_train(const train_args& args) {
  const int problem = parse_problem(args.kind);
  rls_train_options opts;
  rls_train_options_default(&opts, problem, args.n);
  if (args.epochs >= 0) opts.epochs = args.epochs;
  if (args.instances >= 0) opts.instances_per_epoch = args.instances;
  if (args.batches >= 0) opts.batches = args.batches;
  if (args.t_train >= 0) opts.t_train = args.t_train;
  if (args.n_step >= 0) opts.n_step = args.n_step;
  if (args.gamma >= 0) opts.gamma = args.gamma;
  if (args.lr >= 0) opts.lr = args.lr;
  if (args.lr_decay >= 0) opts.lr_decay = args.lr_decay;
  if (args.d_model >= 0) opts.d_model = args.d_model;
  if (args.retain >= 0) opts.retain_checkpoints = args.retain;
  opts.capacity = args.capacity;
  opts.padded_len = args.padded_len;
  opts.op = parse_operator(args.op);
  opts.initial_kind = parse_initial(args.init);
  opts.seed = args.seed;
  opts.jobs = args.jobs;
  opts.center_advantages = args.center_advantages ? 1 : 0;
  if (args.scale > 1) {
    opts.epochs = std::max(1, opts.epochs / args.scale);
    opts.instances_per_epoch = std::max(opts.batches, opts.instances_per_epoch / args.scale);
    opts.instances_per_epoch -= opts.instances_per_epoch % opts.batches;
  }
  if (opts.epochs < 1) die(RLS_ERR_INVALID_ARGUMENT, "--epochs must be >= 1");

  const fs::path dir = args.out.empty() ? fs::path(default_out_root()) / "train" : fs::path(args.out);
  const json config{{"kind", args.kind},
                    {"n", args.n},
                    {"epochs", opts.epochs},
                    {"instances_per_epoch", opts.instances_per_epoch},
                    {"batches", opts.batches},
                    {"t_train", opts.t_train},
                    {"n_step", opts.n_step},
                    {"gamma", opts.gamma},
                    {"lr", opts.lr},
                    {"lr_decay", opts.lr_decay},
                    {"d_model", opts.d_model},
                    {"operator", args.op},
                    {"init", args.init},
                    {"capacity", opts.capacity},
                    {"padded_len", opts.padded_len},
                    {"seed", opts.seed},
                    {"jobs", opts.jobs},
                    {"retain_checkpoints", opts.retain_checkpoints},
                    {"center_advantages", args.center_advantages},
                    {"scale", args.scale},
                    {"out", dir.string()}};
  write_manifest(dir, "train", config);
  std::cout << "effective config: " << config.dump() << "\n";

  const bool quiet = args.quiet;
  const auto log_cb = [](int epoch, int batch, double mean_reward, double mean_cost, double lr, double wall_ms,
                         void* user) {
    if (!*static_cast<const bool*>(user)) {
      std::printf("epoch %3d batch %2d  reward/step %.5f  incumbent %.4f  lr %.3e  (%.0f ms)\n", epoch, batch,
                  mean_reward, mean_cost, lr, wall_ms);
      std::fflush(stdout);
    }
    return 0;
  };
  rls_policy* final_policy = nullptr;
  check(rls_train(&opts, dir.string().c_str(), log_cb, const_cast<bool*>(&quiet), &final_policy), "train");
  const fs::path final_path = dir / "policy-final.ckpt";
  check(rls_policy_save(final_policy, final_path.string().c_str()), "save final policy");
  rls_policy_free(final_policy);
  std::cout << "final policy: " << final_path.string() << "\n";
  return kExitOk;
}

// ---- solve ------------------------------------------------------------------

struct solve_args {
  instance_source source;
  std::string policy_path;
  std::vector<std::string> multi_policy;
  std::string baseline;
  long steps = 1000;
  uint64_t seed = 0;
  int runs = 1;
  std::string op = "2-opt";
  std::string init = "default";
  int padded_len = 0;
  int jobs = 0;
  std::string out;
  std::string results_file;
  std::string trace_dir;
};

int cmd_solve(const solve_args& args) {
  const fs::path dir = args.out.empty() ? fs::path(default_out_root()) / "solve" : fs::path(args.out);
  fs::create_directories(dir);
  const std::vector<owned_instance> instances = load_instances(args.source);

  rls_solve_options opts;
  rls_solve_options_default(&opts);
  opts.op = parse_operator(args.op);
  opts.step_limit = args.steps;
  opts.seed = args.seed;
  opts.runs = args.runs;
  opts.initial_kind = parse_initial(args.init);
  opts.padded_len = args.padded_len;

  rls_policy* policy = nullptr;
  std::vector<rls_policy*> ensemble;
  std::string method;
  if (!args.multi_policy.empty()) {
    for (const auto& path : args.multi_policy) {
      rls_policy* p = nullptr;
      check(rls_policy_load(path.c_str(), &p), "load checkpoint " + path);
      ensemble.push_back(p);
    }
    opts.policy_type = RLS_POLICY_LEARNED;
    method = "multi-policy(" + std::to_string(ensemble.size()) + ")";
  } else if (!args.policy_path.empty()) {
    check(rls_policy_load(args.policy_path.c_str(), &policy), "load checkpoint " + args.policy_path);
    opts.policy_type = RLS_POLICY_LEARNED;
    method = args.runs > 1 ? "learned-mr(" + std::to_string(args.runs) + ")" : "learned";
  } else {
    const std::string name = args.baseline.empty() ? "best" : args.baseline;
    opts.policy_type = name == "first" ? RLS_POLICY_FIRST_IMPROVEMENT : RLS_POLICY_BEST_IMPROVEMENT;
    if (name != "first" && name != "best") die(RLS_ERR_INVALID_ARGUMENT, "unknown baseline " + name);
    method = name + "-improvement";
    if (args.runs > 1) method += "-mr(" + std::to_string(args.runs) + ")";
  }

  if (!args.trace_dir.empty()) fs::create_directories(args.trace_dir);
  std::vector<solve_row> rows(instances.size());
  run_parallel(static_cast<int>(instances.size()), args.jobs, [&](int idx) {
    const owned_instance& inst = instances[static_cast<size_t>(idx)];
    rls_solve_options local = opts;
    local.seed = opts.seed + static_cast<uint64_t>(idx);

    std::ofstream trace_out;
    struct trace_ctx {
      std::ofstream* out;
    } ctx{nullptr};
    rls_trace_fn trace_cb = nullptr;
    if (!args.trace_dir.empty()) {
      trace_out.open(fs::path(args.trace_dir) / (inst.id + ".trace.csv"));
      trace_out << "step,current_cost,incumbent_cost\n";
      ctx.out = &trace_out;
      trace_cb = [](long step, double current, double incumbent, void* user) {
        auto* c = static_cast<trace_ctx*>(user);
        char line[96];
        std::snprintf(line, sizeof(line), "%ld,%.17g,%.17g\n", step, current, incumbent);
        (*c->out) << line;
        return 0;
      };
    }

    rls_solution* best = nullptr;
    rls_solve_stats stats;
    int rc;
    if (!ensemble.empty()) {
      rc = rls_solve_multi_policy(inst.handle, nullptr, const_cast<const rls_policy* const*>(ensemble.data()),
                                  static_cast<int>(ensemble.size()), &local, &best, &stats);
    } else {
      rc = rls_solve(inst.handle, nullptr, policy, &local, trace_cb, &ctx, &best, &stats);
    }
    check(rc, "solve " + inst.id);
    rows[static_cast<size_t>(idx)] =
        solve_row{inst.id,    method,          local.step_limit, local.seed,
                  stats.best_cost, inst.ref.value_or(NAN), stats.runtime_ms};
    rows[static_cast<size_t>(idx)].runtime_ms = stats.runtime_ms;
    rls_solution_free(best);
  });

  const fs::path results_path = args.results_file.empty() ? dir / "results.csv" : fs::path(args.results_file);
  rls_results* results = nullptr;
  check(rls_results_open(results_path.string().c_str(), &results), "open results file");
  append_rows(results, rows);
  check(rls_results_close(results), "close results file");

  double cost_sum = 0, gap_sum = 0;
  int gap_count = 0;
  for (const auto& row : rows) {
    cost_sum += row.cost;
    if (!std::isnan(row.ref) && row.ref != 0) {
      gap_sum += (row.cost - row.ref) / row.ref;
      ++gap_count;
    }
  }
  std::printf("%s on %zu instance(s), T=%ld: mean cost %.4f", method.c_str(), instances.size(), args.steps,
              cost_sum / static_cast<double>(instances.size()));
  if (gap_count > 0) std::printf(", mean gap %.2f%% (%d ref)", 100 * gap_sum / gap_count, gap_count);
  std::printf("\nresults: %s\n", results_path.string().c_str());

  write_manifest(dir, "solve",
                 json{{"instances", args.source.files},
                      {"gen_kind", args.source.gen_kind},
                      {"gen_n", args.source.gen_n},
                      {"gen_count", args.source.gen_count},
                      {"gen_capacity", args.source.gen_capacity},
                      {"gen_seed", args.source.gen_seed},
                      {"policy", args.policy_path},
                      {"multi_policy", args.multi_policy},
                      {"baseline", args.baseline},
                      {"method", method},
                      {"T", args.steps},
                      {"seed", args.seed},
                      {"runs", args.runs},
                      {"operator", args.op},
                      {"init", args.init},
                      {"padded_len", args.padded_len},
                      {"results", results_path.string()},
                      {"trace_dir", args.trace_dir}});

  for (auto* p : ensemble) rls_policy_free(p);
  rls_policy_free(policy);
  return kExitOk;
}

// ---- bench ------------------------------------------------------------------

struct bench_args {
  std::string kind = "tsp";
  int n = 20;
  int count = 100;
  int capacity = 0;
  uint64_t gen_seed = 0;
  std::vector<long> steps = {1000};
  std::vector<std::string> methods = {"first", "best"};
  std::string policy_path;
  uint64_t seed = 0;
  std::string op = "2-opt";
  std::string init = "default";
  int jobs = 0;
  std::string out;
};

int cmd_bench(const bench_args& args) {
  const fs::path dir = args.out.empty() ? fs::path(default_out_root()) / "bench" : fs::path(args.out);
  fs::create_directories(dir);

  instance_source source;
  source.gen_kind = args.kind;
  source.gen_n = args.n;
  source.gen_count = args.count;
  source.gen_capacity = args.capacity;
  source.gen_seed = args.gen_seed;
  const std::vector<owned_instance> instances = load_instances(source);

  rls_policy* policy = nullptr;
  std::vector<std::string> methods = args.methods;
  if (!args.policy_path.empty()) {
    check(rls_policy_load(args.policy_path.c_str(), &policy), "load checkpoint " + args.policy_path);
    if (std::find(methods.begin(), methods.end(), "learned") == methods.end()) {
      methods.insert(methods.begin(), "learned");
    }
  }

  // costs[method][T index][instance]
  std::map<std::string, std::vector<std::vector<double>>> costs;
  std::vector<solve_row> all_rows;
  for (const auto& method : methods) {
    rls_solve_options opts;
    rls_solve_options_default(&opts);
    opts.op = parse_operator(args.op);
    opts.initial_kind = parse_initial(args.init);
    opts.seed = args.seed;
    if (method == "learned") {
      if (policy == nullptr) die(RLS_ERR_INVALID_ARGUMENT, "method 'learned' needs --policy");
      opts.policy_type = RLS_POLICY_LEARNED;
    } else if (method == "first") {
      opts.policy_type = RLS_POLICY_FIRST_IMPROVEMENT;
    } else if (method == "best") {
      opts.policy_type = RLS_POLICY_BEST_IMPROVEMENT;
    } else {
      die(RLS_ERR_INVALID_ARGUMENT, "unknown method " + method);
    }

    auto& per_t = costs[method];
    per_t.resize(args.steps.size());
    for (size_t ti = 0; ti < args.steps.size(); ++ti) {
      per_t[ti].resize(instances.size());
      std::vector<solve_row> rows(instances.size());
      run_parallel(static_cast<int>(instances.size()), args.jobs, [&](int idx) {
        rls_solve_options local = opts;
        local.step_limit = args.steps[ti];
        local.seed = args.seed + static_cast<uint64_t>(idx);
        rls_solution* best = nullptr;
        rls_solve_stats stats;
        check(rls_solve(instances[static_cast<size_t>(idx)].handle, nullptr,
                        method == "learned" ? policy : nullptr, &local, nullptr, nullptr, &best, &stats),
              "solve " + instances[static_cast<size_t>(idx)].id);
        per_t[ti][static_cast<size_t>(idx)] = stats.best_cost;
        rows[static_cast<size_t>(idx)] = solve_row{
            instances[static_cast<size_t>(idx)].id,
            method == "learned" ? "learned" : method + "-improvement",
            args.steps[ti],
            local.seed,
            stats.best_cost,
            instances[static_cast<size_t>(idx)].ref.value_or(NAN),
            stats.runtime_ms};
        rls_solution_free(best);
      });
      all_rows.insert(all_rows.end(), rows.begin(), rows.end());
    }
  }

  const fs::path results_path = dir / "results.csv";
  rls_results* results = nullptr;
  check(rls_results_open(results_path.string().c_str(), &results), "open results file");
  append_rows(results, all_rows);
  check(rls_results_close(results), "close results file");

  // mean-cost table
  std::printf("%-10s", "T");
  for (const auto& method : methods) std::printf("  %16s", method.c_str());
  std::printf("\n");
  for (size_t ti = 0; ti < args.steps.size(); ++ti) {
    std::printf("%-10ld", args.steps[ti]);
    for (const auto& method : methods) {
      const auto& v = costs[method][ti];
      double mean = 0;
      for (double c : v) mean += c;
      std::printf("  %16.4f", mean / static_cast<double>(v.size()));
    }
    std::printf("\n");
  }

  // pairwise win rates at matched T (ties split evenly)
  for (size_t ti = 0; ti < args.steps.size(); ++ti) {
    std::printf("win rates at T=%ld (row beats column):\n", args.steps[ti]);
    std::printf("%-10s", "");
    for (const auto& b : methods) std::printf("  %10s", b.c_str());
    std::printf("\n");
    for (const auto& a : methods) {
      std::printf("%-10s", a.c_str());
      for (const auto& b : methods) {
        if (a == b) {
          std::printf("  %10s", "-");
          continue;
        }
        double wins = 0;
        for (size_t k = 0; k < instances.size(); ++k) {
          const double ca = costs[a][ti][k], cb = costs[b][ti][k];
          if (ca < cb - 1e-9) {
            wins += 1;
          } else if (std::abs(ca - cb) <= 1e-9) {
            wins += 0.5;
          }
        }
        std::printf("  %9.1f%%", 100.0 * wins / static_cast<double>(instances.size()));
      }
      std::printf("\n");
    }
  }

  write_manifest(dir, "bench",
                 json{{"kind", args.kind},
                      {"n", args.n},
                      {"count", args.count},
                      {"capacity", args.capacity},
                      {"gen_seed", args.gen_seed},
                      {"T", args.steps},
                      {"methods", methods},
                      {"policy", args.policy_path},
                      {"seed", args.seed},
                      {"operator", args.op},
                      {"init", args.init},
                      {"results", results_path.string()}});
  std::printf("results: %s\n", results_path.string().c_str());
  rls_policy_free(policy);
  return kExitOk;
}

// ---- gradcheck ---------------------------------------------------------------

struct gradcheck_args {
  std::string kind = "tsp";
  int d_model = 8;
  int length = 6;
  uint64_t seed = 0;
  bool inject_fault = false;
};

int cmd_gradcheck(const gradcheck_args& args) {
  double max_rel_err = 0;
  check(rls_gradcheck(parse_problem(args.kind), args.d_model, args.length, args.seed, args.inject_fault ? 1 : 0,
                      &max_rel_err),
        "gradient check");
  const bool pass = max_rel_err <= 1e-4;
  std::printf("gradcheck %s d_model=%d length=%d seed=%llu: max relative error %.3e -> %s (tolerance 1e-4)\n",
              args.kind.c_str(), args.d_model, args.length, static_cast<unsigned long long>(args.seed), max_rel_err,
              pass ? "PASS" : "FAIL");
  return pass ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rlsearch: learned improvement heuristics for routing problems"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read defaults from a config file");

  gen_args gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate synthetic instances");
  gen_cmd->add_option("--kind", gen.kind, "tsp or cvrp")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "customer count")->capture_default_str();
  gen_cmd->add_option("--count", gen.count, "number of instances")->capture_default_str();
  gen_cmd->add_option("--capacity", gen.capacity, "vehicle capacity (0 = size rule)");
  gen_cmd->add_option("--seed", gen.seed, "base seed; instance k uses seed+k")->capture_default_str();
  gen_cmd->add_option("--format", gen.format, "json or bench (tsplib/cvrplib)")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "output directory");

  train_args train;
  CLI::App* train_cmd = app.add_subcommand("train", "train the pair-selection policy");
  train_cmd->add_option("--kind", train.kind, "tsp or cvrp")->capture_default_str();
  train_cmd->add_option("--n", train.n, "customer count")->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "training epochs (default: reference setting)");
  train_cmd->add_option("--instances", train.instances, "instances per epoch");
  train_cmd->add_option("--batches", train.batches, "batches per epoch");
  train_cmd->add_option("--t-train", train.t_train, "rollout step limit");
  train_cmd->add_option("--n-step", train.n_step, "bootstrap horizon");
  train_cmd->add_option("--gamma", train.gamma, "discount factor");
  train_cmd->add_option("--lr", train.lr, "initial learning rate");
  train_cmd->add_option("--lr-decay", train.lr_decay, "per-epoch learning-rate decay");
  train_cmd->add_option("--d-model", train.d_model, "embedding width");
  train_cmd->add_option("--operator", train.op, "2-opt, swap or relocation")->capture_default_str();
  train_cmd->add_option("--init", train.init, "default, random or nearest-insertion")->capture_default_str();
  train_cmd->add_option("--capacity", train.capacity, "vehicle capacity (0 = size rule)");
  train_cmd->add_option("--padded-len", train.padded_len, "fixed CVRP sequence length (0 = default)");
  train_cmd->add_option("--seed", train.seed, "training seed")->capture_default_str();
  train_cmd->add_option("--jobs", train.jobs, "worker threads (0 = hardware)");
  train_cmd->add_option("--retain", train.retain, "checkpoints to keep (0 = all)");
  train_cmd->add_flag("--center-advantages", train.center_advantages,
                      "subtract the batch-mean advantage in actor updates");
  train_cmd->add_option("--scale", train.scale, "shrink epochs and instances by this factor")->capture_default_str();
  train_cmd->add_option("--out", train.out, "output directory");
  train_cmd->add_flag("--quiet", train.quiet, "suppress per-batch log lines");

  solve_args solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "improve instances with a policy");
  solve_cmd->add_option("--instance", solve.source.files, "instance file (.json/.tsp/.vrp), repeatable");
  solve_cmd->add_option("--gen-kind", solve.source.gen_kind, "generate instances of this kind");
  solve_cmd->add_option("--gen-n", solve.source.gen_n, "generated customer count");
  solve_cmd->add_option("--gen-count", solve.source.gen_count, "number of generated instances");
  solve_cmd->add_option("--gen-capacity", solve.source.gen_capacity, "generated capacity (0 = rule)");
  solve_cmd->add_option("--gen-seed", solve.source.gen_seed, "generator base seed");
  solve_cmd->add_option("--policy", solve.policy_path, "checkpoint for the learned policy");
  solve_cmd->add_option("--multi-policy", solve.multi_policy, "checkpoints for the ensemble, repeatable");
  solve_cmd->add_option("--baseline", solve.baseline, "first or best (improvement rule)");
  solve_cmd->add_option("--T,--steps", solve.steps, "step limit")->capture_default_str();
  solve_cmd->add_option("--seed", solve.seed, "base seed; instance k uses seed+k")->capture_default_str();
  solve_cmd->add_option("--runs", solve.runs, "independent runs per instance, best kept")->capture_default_str();
  solve_cmd->add_option("--operator", solve.op, "2-opt, swap or relocation")->capture_default_str();
  solve_cmd->add_option("--init", solve.init, "initial solution rule")->capture_default_str();
  solve_cmd->add_option("--padded-len", solve.padded_len, "fixed CVRP sequence length (0 = default)");
  solve_cmd->add_option("--jobs", solve.jobs, "solver threads (0 = hardware)");
  solve_cmd->add_option("--out", solve.out, "output directory");
  solve_cmd->add_option("--results", solve.results_file, "results csv path (default <out>/results.csv)");
  solve_cmd->add_option("--trace-dir", solve.trace_dir, "write per-instance step traces here");

  bench_args bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "compare policies on a seeded instance set");
  bench_cmd->add_option("--kind", bench.kind, "tsp or cvrp")->capture_default_str();
  bench_cmd->add_option("--n", bench.n, "customer count")->capture_default_str();
  bench_cmd->add_option("--count", bench.count, "instances in the set")->capture_default_str();
  bench_cmd->add_option("--capacity", bench.capacity, "vehicle capacity (0 = size rule)");
  bench_cmd->add_option("--gen-seed", bench.gen_seed, "generator base seed")->capture_default_str();
  bench_cmd->add_option("--T", bench.steps, "step limits, repeatable")->capture_default_str();
  bench_cmd->add_option("--methods", bench.methods, "subset of learned,first,best")->capture_default_str();
  bench_cmd->add_option("--policy", bench.policy_path, "checkpoint (adds method 'learned')");
  bench_cmd->add_option("--seed", bench.seed, "solve base seed")->capture_default_str();
  bench_cmd->add_option("--operator", bench.op, "2-opt, swap or relocation")->capture_default_str();
  bench_cmd->add_option("--init", bench.init, "initial solution rule")->capture_default_str();
  bench_cmd->add_option("--jobs", bench.jobs, "solver threads (0 = hardware)");
  bench_cmd->add_option("--out", bench.out, "output directory");

  gradcheck_args gradcheck;
  CLI::App* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  grad_cmd->add_option("--kind", gradcheck.kind, "tsp or cvrp")->capture_default_str();
  grad_cmd->add_option("--d-model", gradcheck.d_model, "shrunk embedding width")->capture_default_str();
  grad_cmd->add_option("--length", gradcheck.length, "sequence length")->capture_default_str();
  grad_cmd->add_option("--seed", gradcheck.seed, "seed")->capture_default_str();
  grad_cmd->add_flag("--inject-sign-flip", gradcheck.inject_fault)->group("");  // fault-injection hook for CI

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*gen_cmd) return cmd_gen(gen);
  if (*train_cmd) return cmd_train(train);
  if (*solve_cmd) return cmd_solve(solve);
  if (*bench_cmd) return cmd_bench(bench);
  if (*grad_cmd) return cmd_gradcheck(gradcheck);
  return kExitConfig;
}

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rlsearch/checkpoint.hpp"
#include "rlsearch/instance.hpp"
#include "rlsearch/results.hpp"
#include "rlsearch/search.hpp"

namespace rls {

enum class initial_kind : uint8_t { random_start = 0, nearest_insertion_start = 1 };

initial_kind default_initial(problem_kind kind);  // random for TSP, nearest insertion for CVRP
solution make_initial(const instance& inst, initial_kind init, int padded_len, rng& r);

struct train_config {
  problem_kind kind = problem_kind::tsp;
  int n = 20;
  int capacity = 0;        // 0 = size rule
  int padded_len = 0;      // 0 = default_padded_len (CVRP)
  int epochs = 200;
  int instances_per_epoch = 10240;
  int batches = 10;
  long t_train = 200;
  int n_step = 4;
  double gamma = 0.99;
  double lr = 1e-4;
  double lr_decay = 0.99;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double bn_momentum = 0.9;
  // Subtract the batch-mean advantage in the actor update. Off by default
  // (the literal algorithm applies raw deltas); desk-scale runs destabilize
  // without it once the critic catches up.
  bool center_advantages = false;
  int d_model = 128;
  operator_kind op = operator_kind::two_opt;
  std::optional<initial_kind> init;  // defaults by problem kind
  uint64_t seed = 0;
  int jobs = 0;  // 0 = hardware concurrency
  std::string out_dir;            // empty = keep checkpoints in memory only
  int retain_checkpoints = 8;     // 0 = keep all
};

struct train_batch_stats {
  int epoch = 0;
  int batch = 0;
  double mean_reward = 0;          // per step, averaged over the batch rollout
  double mean_incumbent_cost = 0;  // at the batch's rollout end
  double lr = 0;
  double wall_ms = 0;
};
using train_log_fn = std::function<void(const train_batch_stats&)>;

struct train_result {
  checkpoint final;
  std::vector<std::string> checkpoint_paths;  // last retained, oldest first
  std::vector<train_batch_stats> log;
};

// Batched n-step actor-critic over the continuing improvement task. Rewards
// follow the incumbent-improvement rule; values bootstrap at every segment
// end including the step limit. Deterministic in (config, seed) for a fixed
// shard layout.
train_result train(const train_config& cfg, const train_log_fn& log = nullptr);

// Backward-recursive n-step advantage targets: R <- r_i + gamma R seeded with
// the bootstrap value, delta_i = R - values[i].
std::vector<double> advantage_targets(const std::vector<double>& rewards, double bootstrap,
                                      const std::vector<double>& values, double gamma);

struct adam_state {
  param_set m;
  param_set v;
  long t = 0;
};
adam_state make_adam_state(const param_set& shape);

// Descent-convention update: params -= lr * mhat / (sqrt(vhat) + eps).
void optimizer_step(param_set& params, const param_set& grad, adam_state& state, double lr, double beta1, double beta2,
                    double eps);

struct eval_options {
  operator_kind op = operator_kind::two_opt;
  long step_limit = 1000;
  std::optional<initial_kind> init;  // defaults by problem kind
  int padded_len = 0;
  uint64_t seed = 0;
  int jobs = 0;
  std::string method;  // label for result records; defaults to the policy name
};

struct eval_result {
  double mean_cost = 0;
  double mean_gap = 0;  // over instances with a reference
  int gap_count = 0;
  double wall_ms = 0;
  std::vector<result_record> records;
};

// Runs the policy once per instance with per-instance seed streams; refs (if
// provided) align with instances and feed the gap column.
eval_result evaluate_policy(const policy_spec& policy, const std::vector<instance>& instances,
                            const std::vector<std::optional<double>>& refs, const eval_options& opts);

}  // namespace rls

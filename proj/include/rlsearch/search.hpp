#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rlsearch/checkpoint.hpp"
#include "rlsearch/instance.hpp"
#include "rlsearch/operators.hpp"
#include "rlsearch/rng.hpp"
#include "rlsearch/solution.hpp"

namespace rls {

enum class policy_kind : uint8_t { learned = 0, first_improvement = 1, best_improvement = 2 };

const char* policy_name(policy_kind kind);
policy_kind policy_from_name(const std::string& name);

// Always-accept improvement state: current may worsen, the incumbent never.
struct search_state {
  solution current;
  solution incumbent;
  double incumbent_cost = 0;
  std::optional<action> prev_action;
  long step = 0;
};

search_state make_state(const instance& inst, solution initial);

// One always-accept transition for the raw matrix cell (i, j); returns the
// reward, positive exactly when the incumbent improves.
double apply_step(const instance& inst, search_state& state, operator_kind op, int cell_i, int cell_j);

struct trace_row {
  long step = 0;
  double current_cost = 0;
  double incumbent_cost = 0;
};

struct policy_spec {
  policy_kind kind = policy_kind::best_improvement;
  const checkpoint* ckpt = nullptr;  // required for learned policies
};

struct step_event {
  long step = 0;
  bool restart = false;
  int cell_i = -1;  // sampled/picked cell, -1 on restart
  int cell_j = -1;
};

struct run_options {
  operator_kind op = operator_kind::two_opt;
  long step_limit = 1000;
  bool record_trace = false;
  // called after every transition with the post-step state (audit hook)
  std::function<void(const step_event&, const search_state&)> observer;
};

struct run_result {
  solution best;
  double best_cost = 0;
  double initial_cost = 0;
  double reward_sum = 0;  // undiscounted; equals initial_cost - best_cost
  long restarts = 0;
  long prev_mask_drops = 0;
  std::vector<trace_row> trace;
};

// Hand-crafted pick rules over the canonical-pair neighborhood, lexicographic
// scan order. "Strictly improving" means a cost delta below -1e-10 so that
// zero-cost moves (e.g. depot shuffles) never count as improvements. Empty
// result signals a restart.
std::optional<action> first_improvement_pick(const instance& inst, const search_state& state, operator_kind op);
std::optional<action> best_improvement_pick(const instance& inst, const search_state& state, operator_kind op);

// Uniform random feasible solution (shared with initial_random).
solution restart_solution(const instance& inst, int padded_len, rng& r);

run_result run_improvement(const instance& inst, const solution& initial, const policy_spec& policy,
                           const run_options& opts, rng& r);

// Best of k independent runs; run i uses the fork(i) stream of r, so seed
// sets are nested in k.
run_result multi_run(const instance& inst, const solution& initial, const policy_spec& policy,
                     const run_options& opts, int k, const rng& r);

// Best across checkpoints, one run each.
run_result multi_policy(const instance& inst, const solution& initial, const std::vector<const checkpoint*>& policies,
                        const run_options& opts, const rng& r);

}  // namespace rls

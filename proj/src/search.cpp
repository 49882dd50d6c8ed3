#include "rlsearch/search.hpp"

#include <algorithm>

#include "rlsearch/error.hpp"
#include "rlsearch/features.hpp"
#include "rlsearch/generator.hpp"
#include "rlsearch/network.hpp"
#include "rlsearch/tsplib.hpp"

namespace rls {

const char* policy_name(policy_kind kind) {
  switch (kind) {
    case policy_kind::learned: return "learned";
    case policy_kind::first_improvement: return "first-improvement";
    case policy_kind::best_improvement: return "best-improvement";
  }
  return "?";
}

policy_kind policy_from_name(const std::string& name) {
  if (name == "learned") return policy_kind::learned;
  if (name == "first-improvement" || name == "first") return policy_kind::first_improvement;
  if (name == "best-improvement" || name == "best") return policy_kind::best_improvement;
  fail(errc::invalid_argument, "unknown policy: " + name);
}

search_state make_state(const instance& inst, solution initial) {
  search_state state;
  state.incumbent_cost = tour_length(inst, initial);  // validates feasibility
  state.current = initial;
  state.incumbent = std::move(initial);
  return state;
}

double apply_step(const instance& inst, search_state& state, operator_kind op, int cell_i, int cell_j) {
  solution next = apply_cell(op, state.current, cell_i, cell_j);
  const double next_cost = tour_length(inst, next);  // throws on infeasible moves
  const double new_incumbent_cost = std::min(state.incumbent_cost, next_cost);
  const double reward = state.incumbent_cost - new_incumbent_cost;
  if (next_cost < state.incumbent_cost) {
    state.incumbent = next;
    state.incumbent_cost = next_cost;
  }
  state.current = std::move(next);
  state.prev_action = make_action(cell_i, cell_j);
  ++state.step;
  return reward;
}

namespace {

constexpr double kImprovementEps = 1e-10;

// Deltas within kImprovementEps of each other count as ties and resolve to
// the lexicographically first pair; distinct 2-opt pairs can produce the same
// tour (a segment and its complement), so exact comparisons would leave the
// winner to rounding noise.
std::optional<action> scan_pick(const instance& inst, const search_state& state, operator_kind op, bool best) {
  const int I = state.current.size();
  const std::vector<uint8_t> mask =
      inst.kind() == problem_kind::cvrp ? feasibility_mask(inst, state.current, op) : std::vector<uint8_t>();
  std::optional<action> pick;
  double best_delta = 0;
  for (int i = 0; i < I; ++i) {
    for (int j = i + 1; j < I; ++j) {
      if (!mask.empty() && !mask[static_cast<size_t>(i) * I + j]) continue;
      const double delta = move_delta(inst, state.current, op, i, j);
      if (delta >= -kImprovementEps) continue;  // not strictly improving
      if (!best) return action{i, j};
      if (!pick || delta < best_delta - kImprovementEps) {
        pick = action{i, j};
        best_delta = delta;
      }
    }
  }
  return pick;
}

}  // namespace

std::optional<action> first_improvement_pick(const instance& inst, const search_state& state, operator_kind op) {
  return scan_pick(inst, state, op, /*best=*/false);
}

std::optional<action> best_improvement_pick(const instance& inst, const search_state& state, operator_kind op) {
  return scan_pick(inst, state, op, /*best=*/true);
}

solution restart_solution(const instance& inst, int padded_len, rng& r) { return initial_random(inst, padded_len, r); }

run_result run_improvement(const instance& inst, const solution& initial, const policy_spec& policy,
                           const run_options& opts, rng& r) {
  if (opts.step_limit < 1) fail(errc::invalid_argument, "step limit must be >= 1");
  if (policy.kind == policy_kind::learned && policy.ckpt == nullptr) {
    fail(errc::invalid_argument, "learned policy needs a checkpoint");
  }

  search_state state = make_state(inst, initial);
  run_result result;
  result.initial_cost = state.incumbent_cost;
  const int I = state.current.size();
  if (opts.record_trace) result.trace.push_back({0, result.initial_cost, result.initial_cost});

  std::optional<actor_net> actor;
  actor_cache cache;
  // Networks see unit-square inputs; benchmark instances with larger
  // coordinates are min-max scaled for the features only, costs and masks
  // stay in original units.
  std::optional<instance> feature_inst;
  if (policy.kind == policy_kind::learned) {
    actor.emplace(policy.ckpt->config, &policy.ckpt->actor);
    bool off_unit = false;
    for (const auto& p : inst.coords()) {
      off_unit |= p.x < 0 || p.x > 1 || p.y < 0 || p.y > 1;
    }
    if (off_unit) feature_inst = scale_to_unit(inst).first;
  }
  const instance& net_inst = feature_inst ? *feature_inst : inst;

  std::vector<uint8_t> mask;
  for (long t = 0; t < opts.step_limit; ++t) {
    double reward = 0;
    step_event event;
    if (policy.kind == policy_kind::learned) {
      mask = feasibility_mask(inst, state.current, opts.op);
      if (state.prev_action) {
        // forbid undoing the previous move (both orderings of the pair)
        const size_t a = static_cast<size_t>(state.prev_action->i) * I + state.prev_action->j;
        const size_t b = static_cast<size_t>(state.prev_action->j) * I + state.prev_action->i;
        const uint8_t saved_a = mask[a], saved_b = mask[b];
        mask[a] = mask[b] = 0;
        if (std::find(mask.begin(), mask.end(), uint8_t{1}) == mask.end()) {
          // the anti-cycling mask emptied the neighborhood; drop it
          mask[a] = saved_a;
          mask[b] = saved_b;
          ++result.prev_mask_drops;
        }
      }
      const std::vector<double> feats = node_features(net_inst, state.current);
      const pair_distribution& dist = actor->forward(feats.data(), I, mask.data(), /*train_mode=*/false, cache);
      const int cell = sample_cell(dist, r);
      event.cell_i = cell / I;
      event.cell_j = cell % I;
      reward = apply_step(inst, state, opts.op, cell / I, cell % I);
    } else {
      const std::optional<action> pick = policy.kind == policy_kind::first_improvement
                                             ? first_improvement_pick(inst, state, opts.op)
                                             : best_improvement_pick(inst, state, opts.op);
      if (pick) {
        event.cell_i = pick->i;
        event.cell_j = pick->j;
        reward = apply_step(inst, state, opts.op, pick->i, pick->j);
      } else {
        // local optimum: restart from a random solution; costs one step
        solution fresh = restart_solution(inst, I, r);
        const double fresh_cost = tour_length(inst, fresh);
        const double new_incumbent_cost = std::min(state.incumbent_cost, fresh_cost);
        reward = state.incumbent_cost - new_incumbent_cost;
        if (fresh_cost < state.incumbent_cost) {
          state.incumbent = fresh;
          state.incumbent_cost = fresh_cost;
        }
        state.current = std::move(fresh);
        state.prev_action.reset();
        ++state.step;
        ++result.restarts;
        event.restart = true;
      }
    }
    result.reward_sum += reward;
    if (opts.record_trace) {
      result.trace.push_back({state.step, tour_length(inst, state.current), state.incumbent_cost});
    }
    if (opts.observer) {
      event.step = state.step;
      opts.observer(event, state);
    }
  }

  result.best = std::move(state.incumbent);
  result.best_cost = state.incumbent_cost;
  return result;
}

run_result multi_run(const instance& inst, const solution& initial, const policy_spec& policy,
                     const run_options& opts, int k, const rng& r) {
  if (k < 1) fail(errc::invalid_argument, "multi_run needs k >= 1");
  run_result best;
  for (int run = 0; run < k; ++run) {
    rng stream = r.fork(static_cast<uint64_t>(run));
    run_result res = run_improvement(inst, initial, policy, opts, stream);
    if (run == 0 || res.best_cost < best.best_cost) best = std::move(res);
  }
  return best;
}

run_result multi_policy(const instance& inst, const solution& initial, const std::vector<const checkpoint*>& policies,
                        const run_options& opts, const rng& r) {
  if (policies.empty()) fail(errc::invalid_argument, "multi_policy needs at least one checkpoint");
  run_result best;
  for (size_t idx = 0; idx < policies.size(); ++idx) {
    policy_spec spec{policy_kind::learned, policies[idx]};
    rng stream = r.fork(idx);
    run_result res = run_improvement(inst, initial, spec, opts, stream);
    if (idx == 0 || res.best_cost < best.best_cost) best = std::move(res);
  }
  return best;
}

}  // namespace rls

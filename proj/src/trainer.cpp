#include "rlsearch/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "rlsearch/error.hpp"
#include "rlsearch/features.hpp"
#include "rlsearch/generator.hpp"
#include "rlsearch/network.hpp"

namespace rls {

namespace {

namespace fs = std::filesystem;

double now_ms() {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Fixed shard layout: instance i belongs to shard i % kShards. Gradients are
// reduced in shard order, so results do not depend on the worker count.
constexpr int kShards = 8;

void run_sharded(int count, int jobs, const std::function<void(int shard, int index)>& body) {
  const int workers = std::min(jobs, kShards);
  std::vector<std::thread> pool;
  std::atomic<int> next_shard{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto drain = [&] {
    try {
      for (int shard = next_shard.fetch_add(1); shard < kShards && !stop.load(); shard = next_shard.fetch_add(1)) {
        for (int i = shard; i < count; i += kShards) body(shard, i);
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      stop.store(true);
    }
  };
  for (int w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

initial_kind default_initial(problem_kind kind) {
  return kind == problem_kind::tsp ? initial_kind::random_start : initial_kind::nearest_insertion_start;
}

solution make_initial(const instance& inst, initial_kind init, int padded_len, rng& r) {
  return init == initial_kind::random_start ? initial_random(inst, padded_len, r)
                                            : initial_nearest_insertion(inst, padded_len, r);
}

std::vector<double> advantage_targets(const std::vector<double>& rewards, double bootstrap,
                                      const std::vector<double>& values, double gamma) {
  if (rewards.size() != values.size()) fail(errc::invalid_argument, "rewards/values length mismatch");
  std::vector<double> deltas(rewards.size());
  double ret = bootstrap;
  for (int i = static_cast<int>(rewards.size()) - 1; i >= 0; --i) {
    ret = rewards[static_cast<size_t>(i)] + gamma * ret;
    deltas[static_cast<size_t>(i)] = ret - values[static_cast<size_t>(i)];
  }
  return deltas;
}

adam_state make_adam_state(const param_set& shape) {
  adam_state s;
  s.m = shape;
  s.v = shape;
  s.m.zero();
  s.v.zero();
  return s;
}

void optimizer_step(param_set& params, const param_set& grad, adam_state& state, double lr, double beta1, double beta2,
                    double eps) {
  ++state.t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (size_t t = 0; t < params.tensors.size(); ++t) {
    if (!params.tensors[t].trainable) continue;
    auto& pv = params.tensors[t].v;
    const auto& gv = grad.tensors[t].v;
    auto& mv = state.m.tensors[t].v;
    auto& vv = state.v.tensors[t].v;
    for (size_t c = 0; c < pv.size(); ++c) {
      mv[c] = beta1 * mv[c] + (1 - beta1) * gv[c];
      vv[c] = beta2 * vv[c] + (1 - beta2) * gv[c] * gv[c];
      const double mhat = mv[c] / bc1;
      const double vhat = vv[c] / bc2;
      pv[c] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

namespace {

// Per-instance rollout environment.
struct rollout_env {
  instance inst;
  search_state state;
  rng sampler{0};
};

// Per-shard accumulation buffers.
struct shard_accum {
  param_set actor_grad;
  param_set actor_score;  // unweighted score gradients, for advantage centering
  param_set critic_grad;
  bn_stats_accum actor_stats;
  bn_stats_accum critic_stats;
  double reward_sum = 0;
  double delta_sum = 0;
  long steps = 0;
  std::vector<actor_cache> acaches;
  std::vector<critic_cache> ccaches;
  critic_cache boot_cache;
  std::vector<double> rewards, values;
  std::vector<int> cells;
};

void validate(const train_config& cfg) {
  if (cfg.epochs < 1) fail(errc::invalid_argument, "epochs must be >= 1");
  if (cfg.instances_per_epoch < 1) fail(errc::invalid_argument, "instances_per_epoch must be >= 1");
  if (cfg.batches < 1 || cfg.instances_per_epoch % cfg.batches != 0) {
    fail(errc::invalid_argument, "instances_per_epoch must be a positive multiple of batches");
  }
  if (cfg.t_train < 1) fail(errc::invalid_argument, "t_train must be >= 1");
  if (cfg.n_step < 1 || cfg.n_step > cfg.t_train) fail(errc::invalid_argument, "need 1 <= n_step <= t_train");
  if (cfg.gamma <= 0 || cfg.gamma > 1) fail(errc::invalid_argument, "gamma must be in (0, 1]");
  if (cfg.lr <= 0) fail(errc::invalid_argument, "learning rate must be positive");
  if (cfg.d_model < 2 || cfg.d_model % 2 != 0) fail(errc::invalid_argument, "d_model must be even and >= 2");
}

// Builds the anti-cycling + feasibility mask for the current state.
void build_mask(const instance& inst, const search_state& state, operator_kind op, std::vector<uint8_t>& mask,
                long* drops) {
  const int I = state.current.size();
  mask = feasibility_mask(inst, state.current, op);
  if (state.prev_action) {
    const size_t a = static_cast<size_t>(state.prev_action->i) * I + state.prev_action->j;
    const size_t b = static_cast<size_t>(state.prev_action->j) * I + state.prev_action->i;
    const uint8_t sa = mask[a], sb = mask[b];
    mask[a] = mask[b] = 0;
    if (std::find(mask.begin(), mask.end(), uint8_t{1}) == mask.end()) {
      mask[a] = sa;
      mask[b] = sb;
      if (drops != nullptr) ++(*drops);
    }
  }
}

}  // namespace

train_result train(const train_config& cfg, const train_log_fn& log) {
  validate(cfg);
  const net_config net_cfg = net_config::for_kind(cfg.kind, cfg.d_model);
  const int padded = cfg.kind == problem_kind::cvrp
                         ? (cfg.padded_len > 0 ? cfg.padded_len : default_padded_len(cfg.n))
                         : 0;
  const initial_kind init = cfg.init.value_or(default_initial(cfg.kind));
  const int jobs = resolve_jobs(cfg.jobs);
  const int batch_size = cfg.instances_per_epoch / cfg.batches;

  train_result result;
  result.final = make_checkpoint(net_cfg, cfg.seed);
  checkpoint& ckpt = result.final;
  adam_state actor_adam = make_adam_state(ckpt.actor);
  adam_state critic_adam = make_adam_state(ckpt.critic);

  if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);
  std::ofstream log_file;
  if (!cfg.out_dir.empty()) {
    log_file.open(fs::path(cfg.out_dir) / "train_log.csv");
    log_file << "epoch,batch,mean_reward,mean_incumbent_cost,lr,wall_ms\n";
  }

  std::vector<shard_accum> shards(kShards);
  for (auto& s : shards) {
    s.actor_grad = make_actor_params(net_cfg);
    if (cfg.center_advantages) s.actor_score = make_actor_params(net_cfg);
    s.critic_grad = make_critic_params(net_cfg);
  }
  param_set actor_grad = make_actor_params(net_cfg);
  param_set actor_score = make_actor_params(net_cfg);
  param_set critic_grad = make_critic_params(net_cfg);

  const auto abort_with_snapshot = [&](const std::string& why) {
    if (!cfg.out_dir.empty()) {
      save_checkpoint(ckpt, (fs::path(cfg.out_dir) / "diagnostic.ckpt").string());
    }
    fail(errc::numeric_error, "training aborted: " + why);
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr * std::pow(cfg.lr_decay, static_cast<double>(epoch));
    rng epoch_rng = rng(cfg.seed).fork(0xE000 + static_cast<uint64_t>(epoch));

    std::vector<uint64_t> instance_seeds(static_cast<size_t>(cfg.instances_per_epoch));
    for (auto& s : instance_seeds) s = epoch_rng.next_u64();

    for (int batch = 0; batch < cfg.batches; ++batch) {
      const double batch_start = now_ms();

      // instantiate the batch
      std::vector<rollout_env> envs(static_cast<size_t>(batch_size));
      for (int i = 0; i < batch_size; ++i) {
        const uint64_t inst_seed = instance_seeds[static_cast<size_t>(batch * batch_size + i)];
        rollout_env& env = envs[static_cast<size_t>(i)];
        env.inst = generate({cfg.kind, cfg.n, cfg.capacity, inst_seed});
        rng init_rng = rng(inst_seed).fork(1);
        env.state = make_state(env.inst, make_initial(env.inst, init, padded, init_rng));
        env.sampler = rng(inst_seed).fork(2);
      }

      actor_net actor(net_cfg, &ckpt.actor);
      critic_net critic(net_cfg, &ckpt.critic);
      double batch_reward_sum = 0;
      long batch_steps = 0;

      long t = 0;
      while (t < cfg.t_train) {
        const int seg_len = static_cast<int>(std::min<long>(cfg.n_step, cfg.t_train - t));
        for (auto& s : shards) {
          s.actor_grad.zero();
          if (cfg.center_advantages) s.actor_score.zero();
          s.critic_grad.zero();
          s.actor_stats.reset(net_cfg);
          s.critic_stats.reset(net_cfg);
          s.reward_sum = 0;
          s.delta_sum = 0;
          s.steps = 0;
        }

        const auto rollout_segment = [&](int shard_id, int idx) {
          shard_accum& shard = shards[static_cast<size_t>(shard_id)];
          rollout_env& env = envs[static_cast<size_t>(idx)];
          const int I = env.state.current.size();

          shard.acaches.resize(static_cast<size_t>(seg_len));
          shard.ccaches.resize(static_cast<size_t>(seg_len));
          shard.rewards.assign(static_cast<size_t>(seg_len), 0.0);
          shard.values.assign(static_cast<size_t>(seg_len), 0.0);
          shard.cells.assign(static_cast<size_t>(seg_len), 0);

          std::vector<uint8_t> mask;
          for (int k = 0; k < seg_len; ++k) {
            build_mask(env.inst, env.state, cfg.op, mask, nullptr);
            const std::vector<double> feats = node_features(env.inst, env.state.current);
            const pair_distribution& dist = actor.forward(feats.data(), I, mask.data(), /*train_mode=*/true,
                                                          shard.acaches[static_cast<size_t>(k)], &shard.actor_stats);
            shard.values[static_cast<size_t>(k)] = critic.forward(
                feats.data(), I, /*train_mode=*/true, shard.ccaches[static_cast<size_t>(k)], &shard.critic_stats);
            const int cell = sample_cell(dist, env.sampler);
            shard.cells[static_cast<size_t>(k)] = cell;
            shard.rewards[static_cast<size_t>(k)] = apply_step(env.inst, env.state, cfg.op, cell / I, cell % I);
            shard.reward_sum += shard.rewards[static_cast<size_t>(k)];
            ++shard.steps;
          }

          // bootstrap from the segment-end state, including at the step limit
          const std::vector<double> boot_feats = node_features(env.inst, env.state.current);
          const double bootstrap = critic.forward(boot_feats.data(), I, /*train_mode=*/true, shard.boot_cache, nullptr);

          const std::vector<double> deltas = advantage_targets(shard.rewards, bootstrap, shard.values, cfg.gamma);
          for (int k = seg_len - 1; k >= 0; --k) {
            const int cell = shard.cells[static_cast<size_t>(k)];
            actor.backward_log_prob(shard.acaches[static_cast<size_t>(k)], cell / I, cell % I,
                                    deltas[static_cast<size_t>(k)], shard.actor_grad);
            if (cfg.center_advantages) {
              // second pass with unit weight: the batch-mean advantage is
              // subtracted after reduction as grad - mean * score
              actor.backward_log_prob(shard.acaches[static_cast<size_t>(k)], cell / I, cell % I, 1.0,
                                      shard.actor_score);
              shard.delta_sum += deltas[static_cast<size_t>(k)];
            }
            critic.backward_value(shard.ccaches[static_cast<size_t>(k)], deltas[static_cast<size_t>(k)],
                                  shard.critic_grad);
          }
        };
        try {
          run_sharded(batch_size, jobs, rollout_segment);
        } catch (const error& e) {
          abort_with_snapshot(std::string("rollout failure: ") + e.what());
        }

        // ordered reduction keeps the update bit-reproducible
        actor_grad.zero();
        if (cfg.center_advantages) actor_score.zero();
        critic_grad.zero();
        bn_stats_accum actor_stats, critic_stats;
        double delta_total = 0;
        for (const auto& s : shards) {
          for (size_t tn = 0; tn < actor_grad.tensors.size(); ++tn) {
            auto& dst = actor_grad.tensors[tn].v;
            const auto& src = s.actor_grad.tensors[tn].v;
            for (size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
          }
          if (cfg.center_advantages) {
            for (size_t tn = 0; tn < actor_score.tensors.size(); ++tn) {
              auto& dst = actor_score.tensors[tn].v;
              const auto& src = s.actor_score.tensors[tn].v;
              for (size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
            }
            delta_total += s.delta_sum;
          }
          actor_stats.merge(s.actor_stats);
          critic_stats.merge(s.critic_stats);
          batch_reward_sum += s.reward_sum;
          batch_steps += s.steps;
        }
        if (cfg.center_advantages) {
          const double mean_delta = delta_total / (static_cast<double>(batch_size) * seg_len);
          for (size_t tn = 0; tn < actor_grad.tensors.size(); ++tn) {
            auto& dst = actor_grad.tensors[tn].v;
            const auto& src = actor_score.tensors[tn].v;
            for (size_t c = 0; c < dst.size(); ++c) dst[c] -= mean_delta * src[c];
          }
        }

        // Alg. line 17: averaged ascent direction; Adam descends the negation
        const double inv_scale = -1.0 / (static_cast<double>(batch_size) * seg_len);
        for (auto& tn : actor_grad.tensors) {
          for (auto& g : tn.v) g *= inv_scale;
        }
        for (auto& tn : critic_grad.tensors) {
          for (auto& g : tn.v) g *= inv_scale;
        }
        if (!actor_grad.all_finite() || !critic_grad.all_finite()) {
          abort_with_snapshot("non-finite gradient at epoch " + std::to_string(epoch) + " step " + std::to_string(t));
        }
        optimizer_step(ckpt.actor, actor_grad, actor_adam, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
        optimizer_step(ckpt.critic, critic_grad, critic_adam, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
        apply_running_stats(ckpt.actor, net_cfg, actor_stats, cfg.bn_momentum);
        apply_running_stats(ckpt.critic, net_cfg, critic_stats, cfg.bn_momentum);
        if (!ckpt.actor.all_finite() || !ckpt.critic.all_finite()) {
          abort_with_snapshot("non-finite parameters at epoch " + std::to_string(epoch) + " step " + std::to_string(t));
        }

        t += seg_len;
      }

      train_batch_stats stats;
      stats.epoch = epoch;
      stats.batch = batch;
      stats.mean_reward = batch_steps > 0 ? batch_reward_sum / static_cast<double>(batch_steps) : 0;
      double inc_sum = 0;
      for (const auto& env : envs) inc_sum += env.state.incumbent_cost;
      stats.mean_incumbent_cost = inc_sum / batch_size;
      stats.lr = lr;
      stats.wall_ms = now_ms() - batch_start;
      result.log.push_back(stats);
      if (log_file.is_open()) {
        log_file << stats.epoch << ',' << stats.batch << ',' << stats.mean_reward << ','
                 << stats.mean_incumbent_cost << ',' << stats.lr << ',' << stats.wall_ms << '\n';
        log_file.flush();
      }
      if (log) log(stats);
    }

    ckpt.epoch = static_cast<uint32_t>(epoch + 1);
    if (!cfg.out_dir.empty()) {
      char name[64];
      std::snprintf(name, sizeof(name), "checkpoint-epoch%04d.ckpt", epoch + 1);
      const std::string path = (fs::path(cfg.out_dir) / name).string();
      save_checkpoint(ckpt, path);
      result.checkpoint_paths.push_back(path);
      if (cfg.retain_checkpoints > 0 &&
          static_cast<int>(result.checkpoint_paths.size()) > cfg.retain_checkpoints) {
        fs::remove(result.checkpoint_paths.front());
        result.checkpoint_paths.erase(result.checkpoint_paths.begin());
      }
    }
  }
  return result;
}

eval_result evaluate_policy(const policy_spec& policy, const std::vector<instance>& instances,
                            const std::vector<std::optional<double>>& refs, const eval_options& opts) {
  if (instances.empty()) fail(errc::invalid_argument, "empty test set");
  if (!refs.empty() && refs.size() != instances.size()) {
    fail(errc::invalid_argument, "refs must be empty or align with instances");
  }
  const int jobs = resolve_jobs(opts.jobs);
  const std::string method = opts.method.empty() ? policy_name(policy.kind) : opts.method;
  const double start = now_ms();

  eval_result out;
  out.records.resize(instances.size());
  run_sharded(static_cast<int>(instances.size()), jobs, [&](int, int idx) {
    const instance& inst = instances[static_cast<size_t>(idx)];
    const initial_kind init = opts.init.value_or(default_initial(inst.kind()));
    const int padded = inst.kind() == problem_kind::cvrp
                           ? (opts.padded_len > 0 ? opts.padded_len : default_padded_len(inst.n_customers()))
                           : 0;
    rng base(opts.seed);
    rng init_rng = base.fork(0x10000 + static_cast<uint64_t>(idx));
    const solution initial = make_initial(inst, init, padded, init_rng);

    const double t0 = now_ms();
    double cost;
    if (opts.step_limit == 0) {
      cost = tour_length(inst, initial);
    } else {
      run_options ropts;
      ropts.op = opts.op;
      ropts.step_limit = opts.step_limit;
      rng run_rng = base.fork(0x20000 + static_cast<uint64_t>(idx));
      cost = run_improvement(inst, initial, policy, ropts, run_rng).best_cost;
    }

    result_record rec;
    rec.instance_id = inst.id.empty() ? "instance-" + std::to_string(idx) : inst.id;
    rec.method = method;
    rec.steps = opts.step_limit;
    rec.seed = opts.seed;
    rec.cost = cost;
    if (!refs.empty()) rec.ref = refs[static_cast<size_t>(idx)];
    rec.runtime_ms = now_ms() - t0;
    out.records[static_cast<size_t>(idx)] = std::move(rec);
  });

  double cost_sum = 0, gap_sum = 0;
  for (const auto& rec : out.records) {
    cost_sum += rec.cost;
    if (const auto g = rec.gap()) {
      gap_sum += *g;
      ++out.gap_count;
    }
  }
  out.mean_cost = cost_sum / static_cast<double>(out.records.size());
  out.mean_gap = out.gap_count > 0 ? gap_sum / out.gap_count : 0;
  out.wall_ms = now_ms() - start;
  return out;
}

}  // namespace rls

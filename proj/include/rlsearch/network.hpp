#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rlsearch/instance.hpp"
#include "rlsearch/rng.hpp"
#include "rlsearch/solution.hpp"

namespace rls {

// Architecture hyperparameters shared by actor and critic. The feed-forward
// width tracks d_model at the 4x ratio so shrunk nets keep the same shape.
struct net_config {
  problem_kind kind = problem_kind::tsp;
  int feature_dim = 2;
  int d_model = 128;
  int n_blocks = 3;
  int hidden = 512;
  double clip = 10.0;

  static net_config for_kind(problem_kind kind, int d_model = 128);
  bool operator==(const net_config&) const = default;
};

enum class init_scheme : uint8_t { fan_in_uniform, ones, zeros };

struct tensor {
  std::string name;
  int rows = 0;
  int cols = 0;
  bool trainable = true;
  init_scheme init = init_scheme::fan_in_uniform;
  int fan = 0;  // fan-in used by the uniform init
  std::vector<double> v;

  int64_t size() const { return static_cast<int64_t>(rows) * cols; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
};

// Named parameter container. Tensor order is fixed by the builders and is
// also the checkpoint serialization order.
struct param_set {
  std::vector<tensor> tensors;

  int index_of(const std::string& name) const;
  tensor& at(const std::string& name);
  const tensor& at(const std::string& name) const;
  int64_t n_trainable() const;
  void zero();
  bool all_finite() const;
};

param_set make_actor_params(const net_config& cfg);
param_set make_critic_params(const net_config& cfg);

// Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] weights, BN scale 1 / shift 0,
// running mean 0 / variance 1.
void init_params(param_set& params, rng& r);

// Masked pair-selection distribution over position pairs. probs is exactly
// zero on masked cells and sums to 1 over the rest.
struct pair_distribution {
  int length = 0;
  std::vector<double> probs;
  std::vector<uint8_t> mask;

  double at(int i, int j) const { return probs[static_cast<size_t>(i) * length + j]; }
  bool selectable(int i, int j) const { return mask[static_cast<size_t>(i) * length + j] != 0; }
};

// Activation caches for the backward pass (contents managed by the nets).
struct bn_cache {
  std::vector<double> mean, invstd, xhat;
};
struct block_cache {
  std::vector<double> h_in, q, k, v, attw, z1, u, p1, r1, ff, z2, h_out;
  bn_cache bn1, bn2;
};
struct trunk_cache {
  int length = 0;
  std::vector<double> x, h0, out, og, hc;
  std::vector<int> pool_argmax;
  std::vector<block_cache> blocks;
};
struct actor_cache {
  trunk_cache trunk;
  std::vector<double> qc, kc, y;
  pair_distribution dist;
};
struct critic_cache {
  trunk_cache trunk;
  std::vector<double> p1, r1, node_values;
  double value = 0;
};

// Per-BN-layer batch statistics accumulated across forwards; folded into the
// running statistics once per training segment (momentum 0.9).
struct bn_stats_accum {
  std::vector<std::vector<double>> sum_mean, sum_var;
  long count = 0;
  void reset(const net_config& cfg);
  void merge(const bn_stats_accum& other);
};
void apply_running_stats(param_set& params, const net_config& cfg, const bn_stats_accum& stats, double momentum);

namespace detail {
struct block_refs {
  int wq, wk, wv, g1, b1, rm1, rv1, fw1, fb1, fw2, fb2, g2, b2, rm2, rv2;
};
struct trunk_refs {
  int embed_w, embed_b;
  std::vector<block_refs> blocks;
  int fuse_nw, fuse_nb, fuse_gw, fuse_gb;
};
}  // namespace detail

class actor_net {
public:
  actor_net(const net_config& cfg, const param_set* params);

  // mask: I*I selectable cells; the diagonal is ignored regardless. Throws
  // errc::no_feasible_action when nothing is selectable.
  const pair_distribution& forward(const double* features, int length, const uint8_t* mask, bool train_mode,
                                   actor_cache& cache, bn_stats_accum* stats = nullptr) const;

  // Accumulates scale * d log P(cell) / d params into grad. The cache must
  // come from a train_mode forward on the same parameters.
  void backward_log_prob(const actor_cache& cache, int cell_i, int cell_j, double scale, param_set& grad) const;

  const net_config& config() const { return cfg_; }

private:
  net_config cfg_;
  const param_set* params_;
  detail::trunk_refs refs_;
  int pair_wq_, pair_wk_;
};

class critic_net {
public:
  critic_net(const net_config& cfg, const param_set* params);

  double forward(const double* features, int length, bool train_mode, critic_cache& cache,
                 bn_stats_accum* stats = nullptr) const;

  // Accumulates scale * d value / d params into grad.
  void backward_value(const critic_cache& cache, double scale, param_set& grad) const;

  const net_config& config() const { return cfg_; }

private:
  net_config cfg_;
  const param_set* params_;
  detail::trunk_refs refs_;
  int value_w1_, value_b1_, value_w2_, value_b2_;
};

// Convenience wrappers used by tests and the gradient checker.
pair_distribution actor_forward(const net_config& cfg, const param_set& params, const std::vector<double>& features,
                                int length, const std::vector<uint8_t>& mask, bool train_mode = false);
double critic_forward(const net_config& cfg, const param_set& params, const std::vector<double>& features, int length,
                      bool train_mode = false);

struct log_prob_result {
  double log_prob = 0;
  param_set grad;
};
// Exact gradient of log pi(cell | state) over all actor parameters.
log_prob_result log_prob_and_grad(const net_config& cfg, const param_set& params, const std::vector<double>& features,
                                  int length, const std::vector<uint8_t>& mask, int cell_i, int cell_j);
// Exact gradient of the state value over all critic parameters.
double value_and_grad(const net_config& cfg, const param_set& params, const std::vector<double>& features, int length,
                      param_set& grad);

int sample_cell(const pair_distribution& dist, rng& r);  // row-major cell index
action sample_action(const pair_distribution& dist, rng& r);
double log_prob_cell(const pair_distribution& dist, int i, int j);

// Central finite differences (step 1e-5) against the analytic gradients of a
// freshly initialized actor and critic at the given width, over every
// trainable component. Returns the max relative error (1e-5 denominator
// floor). inject_fault flips one analytic component to prove the harness can
// fail.
double gradient_check(problem_kind kind, int d_model, int length, uint64_t seed, bool inject_fault = false);

}  // namespace rls

#include <doctest.h>

#include <cmath>

#include "rlsearch/features.hpp"
#include "rlsearch/network.hpp"
#include "support.hpp"

using namespace rls;
using namespace testsupport;

namespace {

std::vector<uint8_t> off_diag(int I) {
  std::vector<uint8_t> m(static_cast<size_t>(I) * I, 1);
  for (int i = 0; i < I; ++i) m[static_cast<size_t>(i) * I + i] = 0;
  return m;
}

std::vector<double> rand_feats(int I, int F, uint64_t seed) {
  rng r(seed);
  std::vector<double> out(static_cast<size_t>(I) * F);
  for (auto& x : out) x = r.next_double();
  return out;
}

// Floor of 1e-5 keeps exactly-zero gradients (e.g. biases absorbed by the
// following batch norm) from comparing FD roundoff noise against 0.
double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-5}); }

// Central finite differences against the analytic gradient; returns the max
// relative error over every component of every trainable tensor.
template <typename Eval>
double fd_max_rel_err(param_set& params, const param_set& analytic, Eval eval, double step = 1e-5) {
  double worst = 0;
  for (size_t t = 0; t < params.tensors.size(); ++t) {
    if (!params.tensors[t].trainable) continue;
    for (size_t c = 0; c < params.tensors[t].v.size(); ++c) {
      double& x = params.tensors[t].v[c];
      const double saved = x;
      x = saved + step;
      const double up = eval();
      x = saved - step;
      const double down = eval();
      x = saved;
      const double fd = (up - down) / (2 * step);
      worst = std::max(worst, rel_err(fd, analytic.tensors[t].v[c]));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("actor log-prob gradient matches central finite differences") {
  for (auto kind : {problem_kind::tsp, problem_kind::cvrp}) {
    const net_config cfg = net_config::for_kind(kind, 8);
    param_set p = make_actor_params(cfg);
    rng r(kind == problem_kind::tsp ? 11u : 12u);
    init_params(p, r);
    const int I = 6;
    const auto feats = rand_feats(I, cfg.feature_dim, 21);
    const auto mask = off_diag(I);
    const int ci = 1, cj = 4;

    const log_prob_result res = log_prob_and_grad(cfg, p, feats, I, mask, ci, cj);
    CHECK(std::isfinite(res.log_prob));
    for (const auto& t : res.grad.tensors) {
      for (double g : t.v) CHECK(std::isfinite(g));
    }

    const double worst = fd_max_rel_err(p, res.grad, [&] {
      const pair_distribution d = actor_forward(cfg, p, feats, I, mask, /*train_mode=*/true);
      return log_prob_cell(d, ci, cj);
    });
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("critic value gradient matches central finite differences") {
  for (auto kind : {problem_kind::tsp, problem_kind::cvrp}) {
    const net_config cfg = net_config::for_kind(kind, 8);
    param_set p = make_critic_params(cfg);
    rng r(kind == problem_kind::tsp ? 31u : 32u);
    init_params(p, r);
    const int I = 6;
    const auto feats = rand_feats(I, cfg.feature_dim, 22);

    param_set grad = make_critic_params(cfg);
    grad.zero();
    value_and_grad(cfg, p, feats, I, grad);

    const double worst =
        fd_max_rel_err(p, grad, [&] { return critic_forward(cfg, p, feats, I, /*train_mode=*/true); });
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("probability-weighted score gradients sum to zero") {
  const net_config cfg = net_config::for_kind(problem_kind::tsp, 8);
  param_set p = make_actor_params(cfg);
  rng r(71);
  init_params(p, r);
  const int I = 4;
  const auto feats = rand_feats(I, 2, 5);
  const auto mask = off_diag(I);
  const pair_distribution dist = actor_forward(cfg, p, feats, I, mask, true);

  param_set total = make_actor_params(cfg);
  total.zero();
  actor_net net(cfg, &p);
  actor_cache cache;
  for (int i = 0; i < I; ++i) {
    for (int j = 0; j < I; ++j) {
      if (i == j) continue;
      net.forward(feats.data(), I, mask.data(), true, cache);
      net.backward_log_prob(cache, i, j, dist.at(i, j), total);
    }
  }
  double scale = 0;
  for (const auto& t : total.tensors) {
    for (double g : t.v) scale = std::max(scale, std::abs(g));
  }
  CHECK(scale <= 1e-10);
}

TEST_CASE("gradient accumulation over a batch equals the sum of singles") {
  const net_config cfg = net_config::for_kind(problem_kind::tsp, 8);
  param_set p = make_critic_params(cfg);
  rng r(81);
  init_params(p, r);
  const int I = 5;
  const auto f1 = rand_feats(I, 2, 1);
  const auto f2 = rand_feats(I, 2, 2);

  param_set g1 = make_critic_params(cfg);
  g1.zero();
  value_and_grad(cfg, p, f1, I, g1);
  param_set g2 = make_critic_params(cfg);
  g2.zero();
  value_and_grad(cfg, p, f2, I, g2);

  param_set batch = make_critic_params(cfg);
  batch.zero();
  value_and_grad(cfg, p, f1, I, batch);
  value_and_grad(cfg, p, f2, I, batch);

  for (size_t t = 0; t < batch.tensors.size(); ++t) {
    for (size_t c = 0; c < batch.tensors[t].v.size(); ++c) {
      CHECK(batch.tensors[t].v[c] ==
            doctest::Approx(g1.tensors[t].v[c] + g2.tensors[t].v[c]).epsilon(1e-12));
    }
  }
}

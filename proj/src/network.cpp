#include "rlsearch/network.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "rlsearch/error.hpp"
#include "rlsearch/features.hpp"

namespace rls {

namespace {

using mat_t = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using map_t = Eigen::Map<mat_t>;
using cmap_t = Eigen::Map<const mat_t>;
using vmap_t = Eigen::Map<Eigen::VectorXd>;
using cvmap_t = Eigen::Map<const Eigen::VectorXd>;

constexpr double kBnEps = 1e-5;

cmap_t view(const tensor& t) { return cmap_t(t.data(), t.rows, t.cols); }
map_t view(tensor& t) { return map_t(t.data(), t.rows, t.cols); }

map_t as_mat(std::vector<double>& v, int rows, int cols) {
  v.resize(static_cast<size_t>(rows) * cols);
  return map_t(v.data(), rows, cols);
}
cmap_t as_cmat(const std::vector<double>& v, int rows, int cols) { return cmap_t(v.data(), rows, cols); }

}  // namespace

net_config net_config::for_kind(problem_kind kind, int d_model) {
  net_config cfg;
  cfg.kind = kind;
  cfg.feature_dim = rls::feature_dim(kind);
  cfg.d_model = d_model;
  cfg.n_blocks = 3;
  cfg.hidden = 4 * d_model;
  cfg.clip = 10.0;
  return cfg;
}

int param_set::index_of(const std::string& name) const {
  for (size_t k = 0; k < tensors.size(); ++k) {
    if (tensors[k].name == name) return static_cast<int>(k);
  }
  return -1;
}

tensor& param_set::at(const std::string& name) {
  const int k = index_of(name);
  if (k < 0) fail(errc::invalid_argument, "no tensor named " + name);
  return tensors[static_cast<size_t>(k)];
}

const tensor& param_set::at(const std::string& name) const {
  const int k = index_of(name);
  if (k < 0) fail(errc::invalid_argument, "no tensor named " + name);
  return tensors[static_cast<size_t>(k)];
}

int64_t param_set::n_trainable() const {
  int64_t total = 0;
  for (const auto& t : tensors) {
    if (t.trainable) total += t.size();
  }
  return total;
}

void param_set::zero() {
  for (auto& t : tensors) std::fill(t.v.begin(), t.v.end(), 0.0);
}

bool param_set::all_finite() const {
  for (const auto& t : tensors) {
    for (double x : t.v) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

namespace {

void add_tensor(param_set& p, std::string name, int rows, int cols, init_scheme init, int fan, bool trainable = true) {
  tensor t;
  t.name = std::move(name);
  t.rows = rows;
  t.cols = cols;
  t.trainable = trainable;
  t.init = init;
  t.fan = fan;
  t.v.assign(static_cast<size_t>(rows) * cols, 0.0);
  p.tensors.push_back(std::move(t));
}

void add_trunk(param_set& p, const net_config& cfg) {
  const int d = cfg.d_model, f = cfg.feature_dim, h = cfg.hidden;
  add_tensor(p, "embed.W", d, f, init_scheme::fan_in_uniform, f);
  add_tensor(p, "embed.b", d, 1, init_scheme::fan_in_uniform, f);
  for (int k = 0; k < cfg.n_blocks; ++k) {
    const std::string pre = "enc" + std::to_string(k) + ".";
    add_tensor(p, pre + "attn.Wq", d, d, init_scheme::fan_in_uniform, d);
    add_tensor(p, pre + "attn.Wk", d, d, init_scheme::fan_in_uniform, d);
    add_tensor(p, pre + "attn.Wv", d, d, init_scheme::fan_in_uniform, d);
    add_tensor(p, pre + "bn1.gamma", d, 1, init_scheme::ones, 0);
    add_tensor(p, pre + "bn1.beta", d, 1, init_scheme::zeros, 0);
    add_tensor(p, pre + "bn1.running_mean", d, 1, init_scheme::zeros, 0, false);
    add_tensor(p, pre + "bn1.running_var", d, 1, init_scheme::ones, 0, false);
    add_tensor(p, pre + "ff.W1", h, d, init_scheme::fan_in_uniform, d);
    add_tensor(p, pre + "ff.b1", h, 1, init_scheme::fan_in_uniform, d);
    add_tensor(p, pre + "ff.W2", d, h, init_scheme::fan_in_uniform, h);
    add_tensor(p, pre + "ff.b2", d, 1, init_scheme::fan_in_uniform, h);
    add_tensor(p, pre + "bn2.gamma", d, 1, init_scheme::ones, 0);
    add_tensor(p, pre + "bn2.beta", d, 1, init_scheme::zeros, 0);
    add_tensor(p, pre + "bn2.running_mean", d, 1, init_scheme::zeros, 0, false);
    add_tensor(p, pre + "bn2.running_var", d, 1, init_scheme::ones, 0, false);
  }
  add_tensor(p, "fuse.node.W", d, d, init_scheme::fan_in_uniform, d);
  add_tensor(p, "fuse.node.b", d, 1, init_scheme::fan_in_uniform, d);
  add_tensor(p, "fuse.graph.W", d, d, init_scheme::fan_in_uniform, d);
  add_tensor(p, "fuse.graph.b", d, 1, init_scheme::fan_in_uniform, d);
}

}  // namespace

param_set make_actor_params(const net_config& cfg) {
  param_set p;
  add_trunk(p, cfg);
  // compatibility projections carry no bias, like the attention projections
  add_tensor(p, "pair.Wq", cfg.d_model, cfg.d_model, init_scheme::fan_in_uniform, cfg.d_model);
  add_tensor(p, "pair.Wk", cfg.d_model, cfg.d_model, init_scheme::fan_in_uniform, cfg.d_model);
  return p;
}

param_set make_critic_params(const net_config& cfg) {
  param_set p;
  add_trunk(p, cfg);
  add_tensor(p, "value.W1", cfg.hidden, cfg.d_model, init_scheme::fan_in_uniform, cfg.d_model);
  add_tensor(p, "value.b1", cfg.hidden, 1, init_scheme::fan_in_uniform, cfg.d_model);
  add_tensor(p, "value.W2", 1, cfg.hidden, init_scheme::fan_in_uniform, cfg.hidden);
  add_tensor(p, "value.b2", 1, 1, init_scheme::fan_in_uniform, cfg.hidden);
  return p;
}

void init_params(param_set& params, rng& r) {
  for (auto& t : params.tensors) {
    switch (t.init) {
      case init_scheme::fan_in_uniform: {
        const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(1, t.fan)));
        for (auto& x : t.v) x = (2.0 * r.next_double() - 1.0) * bound;
        break;
      }
      case init_scheme::ones:
        std::fill(t.v.begin(), t.v.end(), 1.0);
        break;
      case init_scheme::zeros:
        std::fill(t.v.begin(), t.v.end(), 0.0);
        break;
    }
  }
}

void bn_stats_accum::reset(const net_config& cfg) {
  sum_mean.assign(static_cast<size_t>(2 * cfg.n_blocks), std::vector<double>(static_cast<size_t>(cfg.d_model), 0.0));
  sum_var = sum_mean;
  count = 0;
}

void bn_stats_accum::merge(const bn_stats_accum& other) {
  if (other.count == 0) return;
  if (sum_mean.empty()) {
    *this = other;
    return;
  }
  for (size_t l = 0; l < sum_mean.size(); ++l) {
    for (size_t d = 0; d < sum_mean[l].size(); ++d) {
      sum_mean[l][d] += other.sum_mean[l][d];
      sum_var[l][d] += other.sum_var[l][d];
    }
  }
  count += other.count;
}

void apply_running_stats(param_set& params, const net_config& cfg, const bn_stats_accum& stats, double momentum) {
  if (stats.count == 0) return;
  for (int k = 0; k < cfg.n_blocks; ++k) {
    const std::string pre = "enc" + std::to_string(k) + ".";
    for (int half = 0; half < 2; ++half) {
      const std::string bn = half == 0 ? "bn1" : "bn2";
      tensor& rmean = params.at(pre + bn + ".running_mean");
      tensor& rvar = params.at(pre + bn + ".running_var");
      const auto& sm = stats.sum_mean[static_cast<size_t>(2 * k + half)];
      const auto& sv = stats.sum_var[static_cast<size_t>(2 * k + half)];
      for (int d = 0; d < cfg.d_model; ++d) {
        rmean.v[static_cast<size_t>(d)] =
            momentum * rmean.v[static_cast<size_t>(d)] + (1 - momentum) * sm[static_cast<size_t>(d)] / stats.count;
        rvar.v[static_cast<size_t>(d)] =
            momentum * rvar.v[static_cast<size_t>(d)] + (1 - momentum) * sv[static_cast<size_t>(d)] / stats.count;
      }
    }
  }
}

namespace {

using detail::block_refs;
using detail::trunk_refs;

int must_index(const param_set& p, const std::string& name) {
  const int k = p.index_of(name);
  if (k < 0) fail(errc::invalid_argument, "parameter set is missing tensor " + name);
  return k;
}

trunk_refs resolve_trunk(const param_set& p, const net_config& cfg) {
  trunk_refs r;
  r.embed_w = must_index(p, "embed.W");
  r.embed_b = must_index(p, "embed.b");
  for (int k = 0; k < cfg.n_blocks; ++k) {
    const std::string pre = "enc" + std::to_string(k) + ".";
    block_refs b;
    b.wq = must_index(p, pre + "attn.Wq");
    b.wk = must_index(p, pre + "attn.Wk");
    b.wv = must_index(p, pre + "attn.Wv");
    b.g1 = must_index(p, pre + "bn1.gamma");
    b.b1 = must_index(p, pre + "bn1.beta");
    b.rm1 = must_index(p, pre + "bn1.running_mean");
    b.rv1 = must_index(p, pre + "bn1.running_var");
    b.fw1 = must_index(p, pre + "ff.W1");
    b.fb1 = must_index(p, pre + "ff.b1");
    b.fw2 = must_index(p, pre + "ff.W2");
    b.fb2 = must_index(p, pre + "ff.b2");
    b.g2 = must_index(p, pre + "bn2.gamma");
    b.b2 = must_index(p, pre + "bn2.beta");
    b.rm2 = must_index(p, pre + "bn2.running_mean");
    b.rv2 = must_index(p, pre + "bn2.running_var");
    r.blocks.push_back(b);
  }
  r.fuse_nw = must_index(p, "fuse.node.W");
  r.fuse_nb = must_index(p, "fuse.node.b");
  r.fuse_gw = must_index(p, "fuse.graph.W");
  r.fuse_gb = must_index(p, "fuse.graph.b");
  return r;
}

const tensor& tref(const param_set& p, int idx) { return p.tensors[static_cast<size_t>(idx)]; }
tensor& tref(param_set& p, int idx) { return p.tensors[static_cast<size_t>(idx)]; }

// y = x * W^T (+ b broadcast over rows)
void linear_forward(const std::vector<double>& x, int rows, const tensor& w, const tensor* b,
                    std::vector<double>& y) {
  map_t ym = as_mat(y, rows, w.rows);
  ym.noalias() = as_cmat(x, rows, w.cols) * view(w).transpose();
  if (b != nullptr) ym.rowwise() += cvmap_t(b->data(), b->rows).transpose();
}

// Batch norm with per-feature statistics over the rows of this forward.
void bn_forward(const std::vector<double>& z, int rows, int d, const tensor& gamma, const tensor& beta,
                const tensor& rmean, const tensor& rvar, bool train_mode, bn_cache& cache, std::vector<double>& out,
                std::vector<double>* stat_mean, std::vector<double>* stat_var) {
  cmap_t zm = as_cmat(z, rows, d);
  map_t om = as_mat(out, rows, d);
  cache.mean.resize(static_cast<size_t>(d));
  cache.invstd.resize(static_cast<size_t>(d));
  cache.xhat.resize(static_cast<size_t>(rows) * d);
  map_t xh(cache.xhat.data(), rows, d);
  if (train_mode) {
    for (int f = 0; f < d; ++f) {
      const double mean = zm.col(f).mean();
      const double var = (zm.col(f).array() - mean).square().mean();
      cache.mean[static_cast<size_t>(f)] = mean;
      cache.invstd[static_cast<size_t>(f)] = 1.0 / std::sqrt(var + kBnEps);
      if (stat_mean != nullptr) {
        (*stat_mean)[static_cast<size_t>(f)] += mean;
        (*stat_var)[static_cast<size_t>(f)] += var;
      }
    }
  } else {
    for (int f = 0; f < d; ++f) {
      cache.mean[static_cast<size_t>(f)] = rmean.v[static_cast<size_t>(f)];
      cache.invstd[static_cast<size_t>(f)] = 1.0 / std::sqrt(rvar.v[static_cast<size_t>(f)] + kBnEps);
    }
  }
  for (int f = 0; f < d; ++f) {
    xh.col(f) = (zm.col(f).array() - cache.mean[static_cast<size_t>(f)]) * cache.invstd[static_cast<size_t>(f)];
    om.col(f) = xh.col(f).array() * gamma.v[static_cast<size_t>(f)] + beta.v[static_cast<size_t>(f)];
  }
}

// Train-mode batch-norm backward; accumulates dgamma/dbeta, writes dx.
void bn_backward(const bn_cache& cache, int rows, int d, const tensor& gamma, const std::vector<double>& dy,
                 tensor& dgamma, tensor& dbeta, std::vector<double>& dx) {
  cmap_t dym = as_cmat(dy, rows, d);
  cmap_t xh(cache.xhat.data(), rows, d);
  map_t dxm = as_mat(dx, rows, d);
  const double m = rows;
  for (int f = 0; f < d; ++f) {
    const auto dyc = dym.col(f).array();
    const auto xhc = xh.col(f).array();
    const double sum_dy = dyc.sum();
    const double sum_dy_xhat = (dyc * xhc).sum();
    dgamma.v[static_cast<size_t>(f)] += sum_dy_xhat;
    dbeta.v[static_cast<size_t>(f)] += sum_dy;
    const double g = gamma.v[static_cast<size_t>(f)];
    dxm.col(f) =
        (cache.invstd[static_cast<size_t>(f)] / m) * (m * g * dyc - g * sum_dy - xhc * (g * sum_dy_xhat));
  }
}

void trunk_forward(const net_config& cfg, const param_set& p, const trunk_refs& refs, const double* features,
                   int rows, bool train_mode, bool max_pool, trunk_cache& cache, bn_stats_accum* stats) {
  const int d = cfg.d_model, h = cfg.hidden, f = cfg.feature_dim;
  if (rows < 2) fail(errc::invalid_argument, "network input needs at least 2 positions");
  cache.length = rows;
  cache.x.assign(features, features + static_cast<size_t>(rows) * f);
  cache.blocks.resize(static_cast<size_t>(cfg.n_blocks));
  if (stats != nullptr && stats->sum_mean.empty()) stats->reset(cfg);

  linear_forward(cache.x, rows, tref(p, refs.embed_w), &tref(p, refs.embed_b), cache.h0);
  {
    map_t h0(cache.h0.data(), rows, d);
    for (int i = 0; i < rows; ++i) {
      for (int dim = 0; dim < d; ++dim) {
        h0(i, dim) += positional_encoding(i, dim, d);
      }
    }
  }

  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(d));
  const std::vector<double>* h_in = &cache.h0;
  for (int k = 0; k < cfg.n_blocks; ++k) {
    block_cache& bc = cache.blocks[static_cast<size_t>(k)];
    const block_refs& br = refs.blocks[static_cast<size_t>(k)];
    bc.h_in = *h_in;

    linear_forward(bc.h_in, rows, tref(p, br.wq), nullptr, bc.q);
    linear_forward(bc.h_in, rows, tref(p, br.wk), nullptr, bc.k);
    linear_forward(bc.h_in, rows, tref(p, br.wv), nullptr, bc.v);

    // scores(i,j) = k_i . q_j / sqrt(d_k); softmax over i within column j
    map_t w = as_mat(bc.attw, rows, rows);
    w.noalias() = as_cmat(bc.k, rows, d) * as_cmat(bc.q, rows, d).transpose() * inv_sqrt_dk;
    for (int j = 0; j < rows; ++j) {
      const double mx = w.col(j).maxCoeff();
      w.col(j) = (w.col(j).array() - mx).exp();
      w.col(j) /= w.col(j).sum();
    }

    map_t z1 = as_mat(bc.z1, rows, d);
    z1.noalias() = w.transpose() * as_cmat(bc.v, rows, d);
    z1 += as_cmat(bc.h_in, rows, d);

    std::vector<double>* sm = stats != nullptr ? &stats->sum_mean[static_cast<size_t>(2 * k)] : nullptr;
    std::vector<double>* sv = stats != nullptr ? &stats->sum_var[static_cast<size_t>(2 * k)] : nullptr;
    bn_forward(bc.z1, rows, d, tref(p, br.g1), tref(p, br.b1), tref(p, br.rm1), tref(p, br.rv1), train_mode, bc.bn1,
               bc.u, sm, sv);

    linear_forward(bc.u, rows, tref(p, br.fw1), &tref(p, br.fb1), bc.p1);
    bc.r1 = bc.p1;
    {
      map_t r1(bc.r1.data(), rows, h);
      r1 = r1.cwiseMax(0.0);
    }
    linear_forward(bc.r1, rows, tref(p, br.fw2), &tref(p, br.fb2), bc.ff);
    map_t z2 = as_mat(bc.z2, rows, d);
    z2 = as_cmat(bc.ff, rows, d) + as_cmat(bc.u, rows, d);

    sm = stats != nullptr ? &stats->sum_mean[static_cast<size_t>(2 * k + 1)] : nullptr;
    sv = stats != nullptr ? &stats->sum_var[static_cast<size_t>(2 * k + 1)] : nullptr;
    const bool last = k + 1 == cfg.n_blocks;
    bn_forward(bc.z2, rows, d, tref(p, br.g2), tref(p, br.b2), tref(p, br.rm2), tref(p, br.rv2), train_mode, bc.bn2,
               last ? cache.out : bc.h_out, sm, sv);
    h_in = last ? &cache.out : &bc.h_out;
  }
  if (stats != nullptr) ++stats->count;

  cache.og.resize(static_cast<size_t>(d));
  cache.pool_argmax.assign(static_cast<size_t>(d), 0);
  cmap_t out(cache.out.data(), rows, d);
  for (int f2 = 0; f2 < d; ++f2) {
    if (max_pool) {
      int arg = 0;
      double best = out(0, f2);
      for (int i = 1; i < rows; ++i) {
        if (out(i, f2) > best) {
          best = out(i, f2);
          arg = i;
        }
      }
      cache.og[static_cast<size_t>(f2)] = best;
      cache.pool_argmax[static_cast<size_t>(f2)] = arg;
    } else {
      cache.og[static_cast<size_t>(f2)] = out.col(f2).mean();
    }
  }

  // fused embeddings: hc_i = lp1(o_i) + lp2(o_g)
  linear_forward(cache.out, rows, tref(p, refs.fuse_nw), &tref(p, refs.fuse_nb), cache.hc);
  {
    Eigen::VectorXd g = view(tref(p, refs.fuse_gw)) * cvmap_t(cache.og.data(), d);
    g += cvmap_t(tref(p, refs.fuse_gb).data(), d);
    map_t hc(cache.hc.data(), rows, d);
    hc.rowwise() += g.transpose();
  }
}

// d_hc: gradient wrt the fused embeddings.
void trunk_backward(const net_config& cfg, const param_set& p, const trunk_refs& refs, const trunk_cache& cache,
                    bool max_pool, const std::vector<double>& d_hc, param_set& grad) {
  const int d = cfg.d_model, h = cfg.hidden, rows = cache.length;
  cmap_t hcg = as_cmat(d_hc, rows, d);
  cmap_t out(cache.out.data(), rows, d);

  std::vector<double> d_out_v(static_cast<size_t>(rows) * d);
  map_t d_out(d_out_v.data(), rows, d);
  d_out.noalias() = hcg * view(tref(p, refs.fuse_nw));
  view(tref(grad, refs.fuse_nw)).noalias() += hcg.transpose() * out;
  const Eigen::VectorXd dg = hcg.colwise().sum().transpose();
  vmap_t(tref(grad, refs.fuse_nb).data(), d) += dg;
  view(tref(grad, refs.fuse_gw)).noalias() += dg * cvmap_t(cache.og.data(), d).transpose();
  vmap_t(tref(grad, refs.fuse_gb).data(), d) += dg;
  const Eigen::VectorXd dog = view(tref(p, refs.fuse_gw)).transpose() * dg;
  if (max_pool) {
    for (int f = 0; f < d; ++f) d_out(cache.pool_argmax[static_cast<size_t>(f)], f) += dog(f);
  } else {
    for (int f = 0; f < d; ++f) d_out.col(f).array() += dog(f) / rows;
  }

  std::vector<double> d_cur = std::move(d_out_v);
  std::vector<double> d_z2, d_u, d_p1, d_z1, d_w, d_s, d_next;
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(d));
  for (int k = cfg.n_blocks - 1; k >= 0; --k) {
    const block_cache& bc = cache.blocks[static_cast<size_t>(k)];
    const block_refs& br = refs.blocks[static_cast<size_t>(k)];

    bn_backward(bc.bn2, rows, d, tref(p, br.g2), d_cur, tref(grad, br.g2), tref(grad, br.b2), d_z2);

    // z2 = u + ff(u)
    cmap_t dz2 = as_cmat(d_z2, rows, d);
    map_t du = as_mat(d_u, rows, d);
    du = dz2;
    map_t dp1 = as_mat(d_p1, rows, h);
    dp1.noalias() = dz2 * view(tref(p, br.fw2));
    view(tref(grad, br.fw2)).noalias() += dz2.transpose() * as_cmat(bc.r1, rows, h);
    vmap_t(tref(grad, br.fb2).data(), d) += dz2.colwise().sum().transpose();
    dp1.array() *= (as_cmat(bc.p1, rows, h).array() > 0.0).cast<double>();
    du.noalias() += dp1 * view(tref(p, br.fw1));
    view(tref(grad, br.fw1)).noalias() += dp1.transpose() * as_cmat(bc.u, rows, d);
    vmap_t(tref(grad, br.fb1).data(), h) += dp1.colwise().sum().transpose();

    bn_backward(bc.bn1, rows, d, tref(p, br.g1), d_u, tref(grad, br.g1), tref(grad, br.b1), d_z1);

    // z1 = h_in + attw^T v
    cmap_t dz1 = as_cmat(d_z1, rows, d);
    cmap_t w(bc.attw.data(), rows, rows);
    cmap_t v(bc.v.data(), rows, d);
    cmap_t q(bc.q.data(), rows, d);
    cmap_t kk(bc.k.data(), rows, d);
    cmap_t h_in(bc.h_in.data(), rows, d);

    std::vector<double> dv_v(static_cast<size_t>(rows) * d);
    map_t dv(dv_v.data(), rows, d);
    dv.noalias() = w * dz1;
    map_t dw = as_mat(d_w, rows, rows);
    dw.noalias() = v * dz1.transpose();

    map_t ds = as_mat(d_s, rows, rows);
    for (int j = 0; j < rows; ++j) {
      const double dot = w.col(j).dot(dw.col(j));
      ds.col(j) = w.col(j).array() * (dw.col(j).array() - dot);
    }

    std::vector<double> dq_v(static_cast<size_t>(rows) * d), dk_v(static_cast<size_t>(rows) * d);
    map_t dq(dq_v.data(), rows, d), dk(dk_v.data(), rows, d);
    dk.noalias() = ds * q * inv_sqrt_dk;
    dq.noalias() = ds.transpose() * kk * inv_sqrt_dk;

    map_t dh = as_mat(d_next, rows, d);
    dh = dz1;
    dh.noalias() += dq * view(tref(p, br.wq));
    dh.noalias() += dk * view(tref(p, br.wk));
    dh.noalias() += dv * view(tref(p, br.wv));
    view(tref(grad, br.wq)).noalias() += dq.transpose() * h_in;
    view(tref(grad, br.wk)).noalias() += dk.transpose() * h_in;
    view(tref(grad, br.wv)).noalias() += dv.transpose() * h_in;

    std::swap(d_cur, d_next);
  }

  // positional encodings are additive constants, so dh0 = d_cur
  cmap_t dh0 = as_cmat(d_cur, rows, d);
  view(tref(grad, refs.embed_w)).noalias() += dh0.transpose() * as_cmat(cache.x, rows, cfg.feature_dim);
  vmap_t(tref(grad, refs.embed_b).data(), d) += dh0.colwise().sum().transpose();
}

}  // namespace

actor_net::actor_net(const net_config& cfg, const param_set* params)
    : cfg_(cfg), params_(params), refs_(resolve_trunk(*params, cfg)) {
  pair_wq_ = must_index(*params, "pair.Wq");
  pair_wk_ = must_index(*params, "pair.Wk");
}

const pair_distribution& actor_net::forward(const double* features, int length, const uint8_t* mask, bool train_mode,
                                            actor_cache& cache, bn_stats_accum* stats) const {
  trunk_forward(cfg_, *params_, refs_, features, length, train_mode, /*max_pool=*/true, cache.trunk, stats);

  const int d = cfg_.d_model;
  linear_forward(cache.trunk.hc, length, tref(*params_, pair_wq_), nullptr, cache.qc);
  linear_forward(cache.trunk.hc, length, tref(*params_, pair_wk_), nullptr, cache.kc);
  map_t y = as_mat(cache.y, length, length);
  y.noalias() = as_cmat(cache.kc, length, d) * as_cmat(cache.qc, length, d).transpose();

  pair_distribution& dist = cache.dist;
  dist.length = length;
  dist.mask.assign(mask, mask + static_cast<size_t>(length) * length);
  for (int i = 0; i < length; ++i) dist.mask[static_cast<size_t>(i) * length + i] = 0;
  dist.probs.assign(static_cast<size_t>(length) * length, 0.0);

  double mx = -std::numeric_limits<double>::infinity();
  const size_t cells = dist.mask.size();
  for (size_t c = 0; c < cells; ++c) {
    if (dist.mask[c]) mx = std::max(mx, cfg_.clip * std::tanh(cache.y[c]));
  }
  if (!std::isfinite(mx)) fail(errc::no_feasible_action, "no-feasible-action: mask has no selectable pair");
  double z = 0;
  for (size_t c = 0; c < cells; ++c) {
    if (dist.mask[c]) {
      dist.probs[c] = std::exp(cfg_.clip * std::tanh(cache.y[c]) - mx);
      z += dist.probs[c];
    }
  }
  for (size_t c = 0; c < cells; ++c) dist.probs[c] /= z;
  return dist;
}

void actor_net::backward_log_prob(const actor_cache& cache, int cell_i, int cell_j, double scale,
                                  param_set& grad) const {
  const int length = cache.dist.length;
  const int d = cfg_.d_model;
  if (!cache.dist.selectable(cell_i, cell_j)) fail(errc::masked_action, "gradient of a masked action");

  // d log P(a) / d ytilde = onehot(a) - P over selectable cells
  std::vector<double> dy_v(static_cast<size_t>(length) * length, 0.0);
  for (int i = 0; i < length; ++i) {
    for (int j = 0; j < length; ++j) {
      const size_t c = static_cast<size_t>(i) * length + j;
      if (!cache.dist.mask[c]) continue;
      const double seed = scale * ((i == cell_i && j == cell_j ? 1.0 : 0.0) - cache.dist.probs[c]);
      const double t = std::tanh(cache.y[c]);
      dy_v[c] = seed * cfg_.clip * (1.0 - t * t);
    }
  }

  cmap_t dy(dy_v.data(), length, length);
  cmap_t qc(cache.qc.data(), length, d);
  cmap_t kc(cache.kc.data(), length, d);
  cmap_t hc(cache.trunk.hc.data(), length, d);

  std::vector<double> dkc_v(static_cast<size_t>(length) * d), dqc_v(static_cast<size_t>(length) * d);
  map_t dkc(dkc_v.data(), length, d), dqc(dqc_v.data(), length, d);
  dkc.noalias() = dy * qc;
  dqc.noalias() = dy.transpose() * kc;

  view(tref(grad, pair_wq_)).noalias() += dqc.transpose() * hc;
  view(tref(grad, pair_wk_)).noalias() += dkc.transpose() * hc;

  std::vector<double> dhc_v(static_cast<size_t>(length) * d);
  map_t dhc(dhc_v.data(), length, d);
  dhc.noalias() = dqc * view(tref(*params_, pair_wq_));
  dhc.noalias() += dkc * view(tref(*params_, pair_wk_));

  trunk_backward(cfg_, *params_, refs_, cache.trunk, /*max_pool=*/true, dhc_v, grad);
}

critic_net::critic_net(const net_config& cfg, const param_set* params)
    : cfg_(cfg), params_(params), refs_(resolve_trunk(*params, cfg)) {
  value_w1_ = must_index(*params, "value.W1");
  value_b1_ = must_index(*params, "value.b1");
  value_w2_ = must_index(*params, "value.W2");
  value_b2_ = must_index(*params, "value.b2");
}

double critic_net::forward(const double* features, int length, bool train_mode, critic_cache& cache,
                           bn_stats_accum* stats) const {
  trunk_forward(cfg_, *params_, refs_, features, length, train_mode, /*max_pool=*/false, cache.trunk, stats);

  const int h = cfg_.hidden;
  linear_forward(cache.trunk.hc, length, tref(*params_, value_w1_), &tref(*params_, value_b1_), cache.p1);
  cache.r1 = cache.p1;
  {
    map_t r1(cache.r1.data(), length, h);
    r1 = r1.cwiseMax(0.0);
  }
  linear_forward(cache.r1, length, tref(*params_, value_w2_), &tref(*params_, value_b2_), cache.node_values);
  cache.value = as_cmat(cache.node_values, length, 1).mean();
  return cache.value;
}

void critic_net::backward_value(const critic_cache& cache, double scale, param_set& grad) const {
  const int length = cache.trunk.length;
  const int d = cfg_.d_model, h = cfg_.hidden;

  const double dnode = scale / length;
  std::vector<double> dvals_v(static_cast<size_t>(length), dnode);
  cmap_t dvals(dvals_v.data(), length, 1);
  cmap_t r1(cache.r1.data(), length, h);
  cmap_t hc(cache.trunk.hc.data(), length, d);

  std::vector<double> dr1_v(static_cast<size_t>(length) * h);
  map_t dr1(dr1_v.data(), length, h);
  dr1.noalias() = dvals * view(tref(*params_, value_w2_));
  view(tref(grad, value_w2_)).noalias() += dvals.transpose() * r1;
  tref(grad, value_b2_).v[0] += scale;

  dr1.array() *= (as_cmat(cache.p1, length, h).array() > 0.0).cast<double>();
  std::vector<double> dhc_v(static_cast<size_t>(length) * d);
  map_t dhc(dhc_v.data(), length, d);
  dhc.noalias() = dr1 * view(tref(*params_, value_w1_));
  view(tref(grad, value_w1_)).noalias() += dr1.transpose() * hc;
  vmap_t(tref(grad, value_b1_).data(), h) += dr1.colwise().sum().transpose();

  trunk_backward(cfg_, *params_, refs_, cache.trunk, /*max_pool=*/false, dhc_v, grad);
}

pair_distribution actor_forward(const net_config& cfg, const param_set& params, const std::vector<double>& features,
                                int length, const std::vector<uint8_t>& mask, bool train_mode) {
  actor_net net(cfg, &params);
  actor_cache cache;
  return net.forward(features.data(), length, mask.data(), train_mode, cache);
}

double critic_forward(const net_config& cfg, const param_set& params, const std::vector<double>& features, int length,
                      bool train_mode) {
  critic_net net(cfg, &params);
  critic_cache cache;
  return net.forward(features.data(), length, train_mode, cache);
}

log_prob_result log_prob_and_grad(const net_config& cfg, const param_set& params, const std::vector<double>& features,
                                  int length, const std::vector<uint8_t>& mask, int cell_i, int cell_j) {
  actor_net net(cfg, &params);
  actor_cache cache;
  const pair_distribution& dist = net.forward(features.data(), length, mask.data(), /*train_mode=*/true, cache);
  log_prob_result out;
  out.log_prob = log_prob_cell(dist, cell_i, cell_j);
  out.grad = make_actor_params(cfg);
  net.backward_log_prob(cache, cell_i, cell_j, 1.0, out.grad);
  return out;
}

double value_and_grad(const net_config& cfg, const param_set& params, const std::vector<double>& features, int length,
                      param_set& grad) {
  critic_net net(cfg, &params);
  critic_cache cache;
  const double value = net.forward(features.data(), length, /*train_mode=*/true, cache);
  net.backward_value(cache, 1.0, grad);
  return value;
}

int sample_cell(const pair_distribution& dist, rng& r) {
  double total = 0;
  for (double p : dist.probs) total += p;
  const double u = r.next_double() * total;
  double acc = 0;
  int last_selectable = -1;
  const int cells = dist.length * dist.length;
  for (int c = 0; c < cells; ++c) {
    if (!dist.mask[static_cast<size_t>(c)]) continue;
    last_selectable = c;
    acc += dist.probs[static_cast<size_t>(c)];
    if (u < acc) return c;
  }
  if (last_selectable < 0) fail(errc::no_feasible_action, "no-feasible-action: empty distribution");
  return last_selectable;
}

action sample_action(const pair_distribution& dist, rng& r) {
  const int c = sample_cell(dist, r);
  return make_action(c / dist.length, c % dist.length);
}

double log_prob_cell(const pair_distribution& dist, int i, int j) {
  if (i < 0 || j < 0 || i >= dist.length || j >= dist.length) fail(errc::invalid_argument, "cell out of range");
  if (!dist.selectable(i, j)) fail(errc::masked_action, "log-prob of a masked action");
  return std::log(dist.at(i, j));
}

namespace {

template <typename Eval>
double fd_worst(param_set& params, const param_set& analytic, const Eval& eval) {
  constexpr double step = 1e-5;
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
      const double a = analytic.tensors[t].v[c];
      worst = std::max(worst, std::abs(fd - a) / std::max({std::abs(fd), std::abs(a), 1e-5}));
    }
  }
  return worst;
}

}  // namespace

double gradient_check(problem_kind kind, int d_model, int length, uint64_t seed, bool inject_fault) {
  if (length < 2) fail(errc::invalid_argument, "gradient check needs length >= 2");
  const net_config cfg = net_config::for_kind(kind, d_model);
  rng master(seed);

  std::vector<double> feats(static_cast<size_t>(length) * cfg.feature_dim);
  for (auto& x : feats) x = master.next_double();
  std::vector<uint8_t> mask(static_cast<size_t>(length) * length, 1);
  for (int i = 0; i < length; ++i) mask[static_cast<size_t>(i) * length + i] = 0;
  const int cell_i = 0, cell_j = length - 1;

  param_set actor_params = make_actor_params(cfg);
  init_params(actor_params, master);
  log_prob_result actor_res = log_prob_and_grad(cfg, actor_params, feats, length, mask, cell_i, cell_j);
  if (inject_fault) {
    for (auto& t : actor_res.grad.tensors) {
      bool flipped = false;
      for (auto& g : t.v) {
        if (std::abs(g) > 1e-3) {
          g = -g;
          flipped = true;
          break;
        }
      }
      if (flipped) break;
    }
  }
  const double actor_worst = fd_worst(actor_params, actor_res.grad, [&] {
    return log_prob_cell(actor_forward(cfg, actor_params, feats, length, mask, /*train_mode=*/true), cell_i, cell_j);
  });

  param_set critic_params = make_critic_params(cfg);
  init_params(critic_params, master);
  param_set critic_grad = make_critic_params(cfg);
  critic_grad.zero();
  value_and_grad(cfg, critic_params, feats, length, critic_grad);
  const double critic_worst = fd_worst(critic_params, critic_grad, [&] {
    return critic_forward(cfg, critic_params, feats, length, /*train_mode=*/true);
  });

  return std::max(actor_worst, critic_worst);
}

}  // namespace rls

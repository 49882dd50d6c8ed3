#include "rlsearch/features.hpp"

#include <cmath>

#include "rlsearch/error.hpp"

namespace rls {

int feature_dim(problem_kind kind) { return kind == problem_kind::tsp ? 2 : 7; }

std::vector<double> node_features(const instance& inst, const solution& sol) {
  const int I = sol.size();
  const int F = feature_dim(inst.kind());
  std::vector<double> out(static_cast<size_t>(I) * F);
  if (inst.kind() == problem_kind::tsp) {
    for (int i = 0; i < I; ++i) {
      const point& p = inst.coord(sol.seq[static_cast<size_t>(i)]);
      out[static_cast<size_t>(i) * 2 + 0] = p.x;
      out[static_cast<size_t>(i) * 2 + 1] = p.y;
    }
    return out;
  }
  const double cap = inst.capacity();
  for (int i = 0; i < I; ++i) {
    const int self = sol.seq[static_cast<size_t>(i)];
    const int left = sol.seq[static_cast<size_t>((i - 1 + I) % I)];
    const int right = sol.seq[static_cast<size_t>((i + 1) % I)];
    double* row = &out[static_cast<size_t>(i) * 7];
    row[0] = inst.coord(left).x;
    row[1] = inst.coord(left).y;
    row[2] = inst.coord(self).x;
    row[3] = inst.coord(self).y;
    row[4] = inst.coord(right).x;
    row[5] = inst.coord(right).y;
    row[6] = inst.demand(self) / cap;
  }
  return out;
}

double positional_encoding(int pos, int dim, int d_model) {
  if (dim < 0 || dim >= d_model) fail(errc::invalid_argument, "positional encoding dim out of range");
  const double exponent = static_cast<double>(dim / 2) / d_model;
  const double angle = pos / std::pow(10000.0, exponent);
  return dim % 2 == 0 ? std::sin(angle) : std::cos(angle);
}

}  // namespace rls

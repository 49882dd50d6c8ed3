#include "rlsearch/instance.hpp"

#include <cmath>

#include "rlsearch/error.hpp"

namespace rls {

namespace {

void require_finite(const std::vector<point>& coords) {
  for (const auto& p : coords) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      fail(errc::invalid_argument, "instance coordinates must be finite");
    }
  }
}

}  // namespace

instance instance::make_tsp(std::vector<point> coords, metric_kind metric) {
  if (coords.size() < 2) fail(errc::invalid_argument, "TSP instance needs at least 2 nodes");
  require_finite(coords);
  instance inst;
  inst.kind_ = problem_kind::tsp;
  inst.metric_ = metric;
  inst.n_ = static_cast<int>(coords.size());
  inst.coords_ = std::move(coords);
  return inst;
}

instance instance::make_cvrp(std::vector<point> coords, std::vector<int> demands, int capacity, int depot_index,
                             metric_kind metric) {
  if (coords.size() < 2) fail(errc::invalid_argument, "CVRP instance needs a depot and at least 1 customer");
  if (demands.size() != coords.size()) fail(errc::invalid_argument, "demands size must match coords size");
  if (capacity <= 0) fail(errc::invalid_argument, "capacity must be positive");
  if (depot_index < 0 || depot_index >= static_cast<int>(coords.size())) {
    fail(errc::invalid_argument, "depot index out of range");
  }
  require_finite(coords);
  if (demands[static_cast<size_t>(depot_index)] != 0) fail(errc::invalid_argument, "depot demand must be 0");
  for (size_t i = 0; i < demands.size(); ++i) {
    if (demands[i] < 0) fail(errc::invalid_argument, "demands must be non-negative");
    if (demands[i] > capacity) fail(errc::invalid_argument, "every demand must be <= capacity");
    if (static_cast<int>(i) != depot_index && demands[i] == 0) {
      // zero-demand customers are legal in benchmark files; nothing to check
    }
  }
  instance inst;
  inst.kind_ = problem_kind::cvrp;
  inst.metric_ = metric;
  inst.n_ = static_cast<int>(coords.size()) - 1;
  inst.coords_ = std::move(coords);
  inst.demands_ = std::move(demands);
  inst.capacity_ = capacity;
  inst.depot_ = depot_index;
  return inst;
}

}  // namespace rls

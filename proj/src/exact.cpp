#include "rlsearch/exact.hpp"

#include <algorithm>
#include <limits>

#include "rlsearch/error.hpp"

namespace rls {

exact_result exact_tsp(const instance& inst) {
  if (inst.kind() != problem_kind::tsp) fail(errc::invalid_argument, "exact_tsp requires a TSP instance");
  const int n = inst.n_locations();
  if (n > 13) fail(errc::invalid_argument, "exact_tsp supports n <= 13");

  const double inf = std::numeric_limits<double>::infinity();
  const int full = 1 << n;
  // dp[mask][last]: cheapest path over `mask` starting at node 0, ending at `last`
  std::vector<double> dp(static_cast<size_t>(full) * n, inf);
  std::vector<int8_t> parent(static_cast<size_t>(full) * n, -1);
  dp[static_cast<size_t>(1) * n + 0] = 0;

  for (int mask = 1; mask < full; ++mask) {
    if (!(mask & 1)) continue;
    for (int last = 0; last < n; ++last) {
      const double base = dp[static_cast<size_t>(mask) * n + last];
      if (base == inf || !(mask & (1 << last))) continue;
      for (int next = 1; next < n; ++next) {
        if (mask & (1 << next)) continue;
        const int nmask = mask | (1 << next);
        const double cand = base + inst.dist(last, next);
        if (cand < dp[static_cast<size_t>(nmask) * n + next]) {
          dp[static_cast<size_t>(nmask) * n + next] = cand;
          parent[static_cast<size_t>(nmask) * n + next] = static_cast<int8_t>(last);
        }
      }
    }
  }

  double best = inf;
  int best_last = 0;
  for (int last = 1; last < n; ++last) {
    const double cand = dp[static_cast<size_t>(full - 1) * n + last] + inst.dist(last, 0);
    if (cand < best) {
      best = cand;
      best_last = last;
    }
  }
  if (n == 1) best = 0;

  exact_result out;
  out.cost = best;
  int mask = full - 1;
  int cur = best_last;
  while (cur != -1) {
    out.tour.push_back(cur);
    const int prev = parent[static_cast<size_t>(mask) * n + cur];
    mask &= ~(1 << cur);
    cur = prev;
  }
  std::reverse(out.tour.begin(), out.tour.end());
  return out;
}

}  // namespace rls

#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles are
// deliberately written with different algorithms/accumulation orders than the
// library paths they check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rlsearch/generator.hpp"
#include "rlsearch/instance.hpp"
#include "rlsearch/operators.hpp"
#include "rlsearch/rng.hpp"
#include "rlsearch/solution.hpp"

namespace testsupport {

inline rls::instance random_tsp(int n, uint64_t seed) {
  return rls::generate({rls::problem_kind::tsp, n, 0, seed});
}

inline rls::instance random_cvrp(int n, uint64_t seed, int capacity = 0) {
  return rls::generate({rls::problem_kind::cvrp, n, capacity, seed});
}

// Independent tour-length: hypot accumulated in reverse edge order with long
// double precision.
inline double oracle_tour_length(const rls::instance& inst, const rls::solution& sol) {
  const int I = sol.size();
  long double total = 0;
  for (int k = I - 1; k >= 0; --k) {
    const auto& a = inst.coord(sol.seq[static_cast<size_t>(k)]);
    const auto& b = inst.coord(sol.seq[static_cast<size_t>((k + 1) % I)]);
    double d = std::hypot(a.x - b.x, a.y - b.y);
    if (inst.metric() == rls::metric_kind::rounded_euclidean) d = std::floor(d + 0.5);
    total += d;
  }
  return static_cast<double>(total);
}

// Independent CVRP route splitter: rotate a copy so it starts at a depot slot,
// then split linearly.
inline std::vector<std::vector<int>> oracle_split_routes(const rls::instance& inst, const rls::solution& sol) {
  std::vector<int> seq = sol.seq;
  const auto it = std::find(seq.begin(), seq.end(), inst.depot());
  std::rotate(seq.begin(), it, seq.end());
  std::vector<std::vector<int>> routes;
  std::vector<int> cur;
  for (int v : seq) {
    if (v == inst.depot()) {
      if (!cur.empty()) routes.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(v);
    }
  }
  if (!cur.empty()) routes.push_back(cur);
  return routes;
}

inline bool oracle_cvrp_feasible(const rls::instance& inst, const rls::solution& sol) {
  std::vector<int> seen(static_cast<size_t>(inst.n_locations()), 0);
  for (int v : sol.seq) {
    if (v < 0 || v >= inst.n_locations()) return false;
    ++seen[static_cast<size_t>(v)];
  }
  for (int v = 0; v < inst.n_locations(); ++v) {
    if (v != inst.depot() && seen[static_cast<size_t>(v)] != 1) return false;
  }
  if (seen[static_cast<size_t>(inst.depot())] == 0) return false;
  for (const auto& route : oracle_split_routes(inst, sol)) {
    int load = 0;
    for (int c : route) load += inst.demand(c);
    if (load > inst.capacity()) return false;
  }
  return true;
}

inline rls::solution random_solution(const rls::instance& inst, int padded_len, rls::rng& r) {
  return rls::initial_random(inst, padded_len, r);
}

// All tours of a small TSP instance by permutation enumeration.
inline double brute_force_optimum(const rls::instance& inst) {
  std::vector<int> perm(static_cast<size_t>(inst.n_locations()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    rls::solution sol{perm};
    best = std::min(best, oracle_tour_length(inst, sol));
  } while (std::next_permutation(perm.begin() + 1, perm.end()));
  return best;
}

}  // namespace testsupport

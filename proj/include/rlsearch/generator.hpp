#pragma once

#include <cstdint>

#include "rlsearch/instance.hpp"
#include "rlsearch/rng.hpp"
#include "rlsearch/solution.hpp"

namespace rls {

// Synthetic instance sampling: coordinates uniform in the unit square, CVRP
// demands uniform in {1..9}, capacity by problem size (30/40/50 at 20/50/100).
struct generator_spec {
  problem_kind kind = problem_kind::tsp;
  int n = 20;        // customers
  int capacity = 0;  // 0 = default_capacity(n)
  uint64_t seed = 0;
};

int default_capacity(int n);

// Fixed CVRP sequence length: 2n, capped at n+25 for large n.
int default_padded_len(int n);

instance generate(const generator_spec& spec);

// Uniform random permutation (TSP) or random capacity-feasible split padded
// to padded_len (CVRP, 0 = default).
solution initial_random(const instance& inst, int padded_len, rng& r);

// Constructive start: grow the tour by repeatedly inserting the unvisited
// node nearest to the partial solution at the cheapest feasible position.
solution initial_nearest_insertion(const instance& inst, int padded_len, rng& r);

}  // namespace rls

#pragma once

#include <vector>

#include "rlsearch/instance.hpp"

namespace rls {

struct exact_result {
  double cost = 0;
  std::vector<int> tour;
};

// Held-Karp dynamic program over node subsets; exact optimum for TSP
// instances with n <= 13.
exact_result exact_tsp(const instance& inst);

}  // namespace rls

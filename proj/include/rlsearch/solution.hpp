#pragma once

#include <string>
#include <vector>

#include "rlsearch/instance.hpp"

namespace rls {

// A tour as a sequence of location indices. TSP solutions are permutations of
// all locations; CVRP solutions have fixed padded length with every customer
// exactly once and depot copies in the remaining slots. The objective closes
// the cycle from the last slot back to the first.
struct solution {
  std::vector<int> seq;
  int size() const { return static_cast<int>(seq.size()); }
  bool operator==(const solution& other) const = default;
};

// Canonical position pair, 0 <= i < j < I.
struct action {
  int i = 0;
  int j = 0;
  bool operator==(const action& other) const = default;
};

// Canonicalizes (a, b); rejects the diagonal with errc::degenerate_action.
action make_action(int a, int b);

struct feasibility_report {
  bool ok = true;
  std::string violation;  // empty when feasible
  int route_index = -1;   // first overloaded route, when applicable
  int route_load = 0;
};

// Cyclic depot-delimited customer run.
struct route_view {
  std::vector<int> customers;
  int load = 0;
};

double tour_length(const instance& inst, const solution& sol);
feasibility_report check_feasible(const instance& inst, const solution& sol);
bool is_feasible(const instance& inst, const solution& sol);

// Routes of a CVRP solution, scanned cyclically from the first depot slot.
std::vector<route_view> extract_routes(const instance& inst, const solution& sol);

}  // namespace rls

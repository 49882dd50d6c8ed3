#include "rlsearch/solution.hpp"

#include <algorithm>

#include "rlsearch/error.hpp"

namespace rls {

action make_action(int a, int b) {
  if (a == b) fail(errc::degenerate_action, "action positions must differ");
  return a < b ? action{a, b} : action{b, a};
}

namespace {

feasibility_report infeasible(std::string why, int route = -1, int load = 0) {
  feasibility_report rep;
  rep.ok = false;
  rep.violation = std::move(why);
  rep.route_index = route;
  rep.route_load = load;
  return rep;
}

feasibility_report check_tsp(const instance& inst, const solution& sol) {
  const int n = inst.n_locations();
  if (sol.size() != n) return infeasible("sequence length != node count");
  std::vector<uint8_t> seen(static_cast<size_t>(n), 0);
  for (int v : sol.seq) {
    if (v < 0 || v >= n) return infeasible("location index out of range");
    if (seen[static_cast<size_t>(v)]) return infeasible("location visited twice");
    seen[static_cast<size_t>(v)] = 1;
  }
  return {};
}

feasibility_report check_cvrp(const instance& inst, const solution& sol) {
  const int n_loc = inst.n_locations();
  const int depot = inst.depot();
  if (sol.size() < n_loc) return infeasible("sequence shorter than location count");
  std::vector<uint8_t> seen(static_cast<size_t>(n_loc), 0);
  int depot_slots = 0;
  for (int v : sol.seq) {
    if (v < 0 || v >= n_loc) return infeasible("location index out of range");
    if (v == depot) {
      ++depot_slots;
    } else {
      if (seen[static_cast<size_t>(v)]) return infeasible("customer visited twice");
      seen[static_cast<size_t>(v)] = 1;
    }
  }
  for (int v = 0; v < n_loc; ++v) {
    if (v != depot && !seen[static_cast<size_t>(v)]) return infeasible("customer missing");
  }
  if (depot_slots == 0) return infeasible("no depot slot");

  // Route loads over cyclic depot-delimited runs.
  const int I = sol.size();
  int start = 0;
  while (sol.seq[static_cast<size_t>(start)] != depot) ++start;
  int route = -1;
  int load = 0;
  bool in_route = false;
  for (int k = 1; k <= I; ++k) {
    const int v = sol.seq[static_cast<size_t>((start + k) % I)];
    if (v == depot) {
      in_route = false;
      load = 0;
    } else {
      if (!in_route) {
        in_route = true;
        ++route;
        load = 0;
      }
      load += inst.demand(v);
      if (load > inst.capacity()) {
        return infeasible("route load exceeds capacity", route, load);
      }
    }
  }
  return {};
}

}  // namespace

feasibility_report check_feasible(const instance& inst, const solution& sol) {
  return inst.kind() == problem_kind::tsp ? check_tsp(inst, sol) : check_cvrp(inst, sol);
}

bool is_feasible(const instance& inst, const solution& sol) { return check_feasible(inst, sol).ok; }

double tour_length(const instance& inst, const solution& sol) {
  const feasibility_report rep = check_feasible(inst, sol);
  if (!rep.ok) fail(errc::infeasible_solution, "infeasible-solution: " + rep.violation);
  const int I = sol.size();
  double total = 0;
  for (int k = 0; k < I; ++k) {
    const int a = sol.seq[static_cast<size_t>(k)];
    const int b = sol.seq[static_cast<size_t>((k + 1) % I)];
    if (a != b) total += inst.dist(a, b);
  }
  return total;
}

std::vector<route_view> extract_routes(const instance& inst, const solution& sol) {
  if (inst.kind() != problem_kind::cvrp) fail(errc::invalid_argument, "routes are defined for CVRP only");
  const int depot = inst.depot();
  const int I = sol.size();
  int start = -1;
  for (int k = 0; k < I; ++k) {
    if (sol.seq[static_cast<size_t>(k)] == depot) {
      start = k;
      break;
    }
  }
  if (start < 0) fail(errc::infeasible_solution, "no depot slot in CVRP solution");
  std::vector<route_view> routes;
  route_view current;
  for (int k = 1; k <= I; ++k) {
    const int v = sol.seq[static_cast<size_t>((start + k) % I)];
    if (v == depot) {
      if (!current.customers.empty()) {
        routes.push_back(std::move(current));
        current = {};
      }
    } else {
      current.customers.push_back(v);
      current.load += inst.demand(v);
    }
  }
  if (!current.customers.empty()) routes.push_back(std::move(current));
  return routes;
}

}  // namespace rls

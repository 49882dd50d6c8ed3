#include "rlsearch/generator.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "rlsearch/error.hpp"

namespace rls {

int default_capacity(int n) {
  if (n <= 20) return 30;
  if (n <= 50) return 40;
  return 50;
}

int default_padded_len(int n) { return n > 50 ? n + 25 : 2 * n; }

instance generate(const generator_spec& spec) {
  if (spec.n < 2) fail(errc::invalid_argument, "generator needs n >= 2");
  rng r(spec.seed);
  if (spec.kind == problem_kind::tsp) {
    std::vector<point> coords(static_cast<size_t>(spec.n));
    for (auto& p : coords) {
      p.x = r.next_double();
      p.y = r.next_double();
    }
    instance inst = instance::make_tsp(std::move(coords));
    inst.id = "tsp" + std::to_string(spec.n) + "-s" + std::to_string(spec.seed);
    return inst;
  }
  const int capacity = spec.capacity > 0 ? spec.capacity : default_capacity(spec.n);
  std::vector<point> coords(static_cast<size_t>(spec.n) + 1);
  std::vector<int> demands(static_cast<size_t>(spec.n) + 1, 0);
  for (auto& p : coords) {
    p.x = r.next_double();
    p.y = r.next_double();
  }
  for (int c = 1; c <= spec.n; ++c) demands[static_cast<size_t>(c)] = r.next_int(1, 9);
  instance inst = instance::make_cvrp(std::move(coords), std::move(demands), capacity, 0);
  inst.id = "cvrp" + std::to_string(spec.n) + "-s" + std::to_string(spec.seed);
  return inst;
}

namespace {

// Depot-prefixed routes padded with trailing depot slots to fixed length.
solution pad_routes(const instance& inst, const std::vector<std::vector<int>>& routes, int padded_len) {
  const int I = padded_len > 0 ? padded_len : default_padded_len(inst.n_customers());
  solution sol;
  sol.seq.reserve(static_cast<size_t>(I));
  for (const auto& route : routes) {
    sol.seq.push_back(inst.depot());
    sol.seq.insert(sol.seq.end(), route.begin(), route.end());
  }
  if (sol.size() > I) fail(errc::invalid_argument, "padded length too small for route count");
  sol.seq.resize(static_cast<size_t>(I), inst.depot());
  return sol;
}

std::vector<int> customer_list(const instance& inst) {
  std::vector<int> customers;
  customers.reserve(static_cast<size_t>(inst.n_customers()));
  for (int v = 0; v < inst.n_locations(); ++v) {
    if (!inst.is_depot(v)) customers.push_back(v);
  }
  return customers;
}

}  // namespace

solution initial_random(const instance& inst, int padded_len, rng& r) {
  if (inst.kind() == problem_kind::tsp) {
    solution sol;
    sol.seq.resize(static_cast<size_t>(inst.n_locations()));
    std::iota(sol.seq.begin(), sol.seq.end(), 0);
    r.shuffle(sol.seq);
    return sol;
  }
  std::vector<int> order = customer_list(inst);
  r.shuffle(order);
  std::vector<std::vector<int>> routes;
  int load = 0;
  for (int c : order) {
    if (routes.empty() || load + inst.demand(c) > inst.capacity()) {
      routes.emplace_back();
      load = 0;
    }
    routes.back().push_back(c);
    load += inst.demand(c);
  }
  return pad_routes(inst, routes, padded_len);
}

solution initial_nearest_insertion(const instance& inst, int padded_len, rng& /*r*/) {
  const bool cvrp = inst.kind() == problem_kind::cvrp;
  std::vector<int> unvisited = customer_list(inst);

  // Seed: index 0 for TSP, customer nearest to the depot for CVRP.
  int seed_node = unvisited.front();
  if (cvrp) {
    double best = std::numeric_limits<double>::infinity();
    for (int c : unvisited) {
      const double d = inst.dist(inst.depot(), c);
      if (d < best) {
        best = d;
        seed_node = c;
      }
    }
  }
  std::erase(unvisited, seed_node);
  std::vector<std::vector<int>> routes{{seed_node}};
  std::vector<int> loads{inst.demand(seed_node)};

  auto tour_dist = [&](int v) {
    double best = cvrp ? inst.dist(inst.depot(), v) : std::numeric_limits<double>::infinity();
    for (const auto& route : routes) {
      for (int u : route) best = std::min(best, inst.dist(u, v));
    }
    return best;
  };

  while (!unvisited.empty()) {
    // nearest unvisited node to the partial solution, lowest index on ties
    int pick = -1;
    double pick_dist = std::numeric_limits<double>::infinity();
    for (int v : unvisited) {
      const double d = tour_dist(v);
      if (d < pick_dist) {
        pick_dist = d;
        pick = v;
      }
    }

    // cheapest insertion position; capacity-violating routes are skipped
    int best_route = -1, best_pos = -1;
    double best_inc = std::numeric_limits<double>::infinity();
    for (size_t ri = 0; ri < routes.size(); ++ri) {
      if (cvrp && loads[ri] + inst.demand(pick) > inst.capacity()) continue;
      const auto& route = routes[ri];
      const int len = static_cast<int>(route.size());
      for (int pos = 0; pos <= len; ++pos) {
        int prev, next;
        if (cvrp) {
          prev = pos == 0 ? inst.depot() : route[static_cast<size_t>(pos - 1)];
          next = pos == len ? inst.depot() : route[static_cast<size_t>(pos)];
        } else {
          // single open tour treated as a cycle
          prev = pos == 0 ? route.back() : route[static_cast<size_t>(pos - 1)];
          next = pos == len ? route.front() : route[static_cast<size_t>(pos % len)];
        }
        const double inc = inst.dist(prev, pick) + inst.dist(pick, next) - inst.dist(prev, next);
        if (inc < best_inc) {
          best_inc = inc;
          best_route = static_cast<int>(ri);
          best_pos = pos;
        }
      }
    }
    if (best_route < 0) {  // no feasible insertion: open a new route
      routes.push_back({pick});
      loads.push_back(inst.demand(pick));
    } else {
      routes[static_cast<size_t>(best_route)].insert(routes[static_cast<size_t>(best_route)].begin() + best_pos, pick);
      loads[static_cast<size_t>(best_route)] += inst.demand(pick);
    }
    std::erase(unvisited, pick);
  }

  if (!cvrp) {
    solution sol;
    sol.seq = routes.front();
    return sol;
  }
  return pad_routes(inst, routes, padded_len);
}

}  // namespace rls

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace rls {

enum class problem_kind : uint8_t { tsp = 0, cvrp = 1 };
enum class metric_kind : uint8_t { euclidean = 0, rounded_euclidean = 1 };

struct point {
  double x = 0;
  double y = 0;
};

// Immutable routing instance. TSP instances hold n customer locations; CVRP
// instances additionally hold one depot, so coords has n+1 entries. Synthetic
// instances use the exact Euclidean metric; benchmark files use the standard
// nearest-integer rounded metric.
class instance {
public:
  static instance make_tsp(std::vector<point> coords, metric_kind metric = metric_kind::euclidean);
  static instance make_cvrp(std::vector<point> coords, std::vector<int> demands, int capacity, int depot_index,
                            metric_kind metric = metric_kind::euclidean);

  problem_kind kind() const { return kind_; }
  metric_kind metric() const { return metric_; }
  int n_customers() const { return n_; }
  int n_locations() const { return static_cast<int>(coords_.size()); }
  const std::vector<point>& coords() const { return coords_; }
  const point& coord(int loc) const { return coords_[static_cast<size_t>(loc)]; }
  int demand(int loc) const { return kind_ == problem_kind::tsp ? 0 : demands_[static_cast<size_t>(loc)]; }
  const std::vector<int>& demands() const { return demands_; }
  int capacity() const { return capacity_; }
  int depot() const { return depot_; }
  bool is_depot(int loc) const { return kind_ == problem_kind::cvrp && loc == depot_; }

  double dist(int a, int b) const {
    const point& p = coords_[static_cast<size_t>(a)];
    const point& q = coords_[static_cast<size_t>(b)];
    const double d = std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y));
    return metric_ == metric_kind::euclidean ? d : std::floor(d + 0.5);
  }

  // Optional label carried through results files (benchmark name or seed tag).
  std::string id;

  // Empty until filled by a factory; factories validate all invariants.
  instance() = default;

private:
  problem_kind kind_ = problem_kind::tsp;
  metric_kind metric_ = metric_kind::euclidean;
  int n_ = 0;
  std::vector<point> coords_;
  std::vector<int> demands_;
  int capacity_ = 0;
  int depot_ = -1;
};

}  // namespace rls

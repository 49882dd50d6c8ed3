#pragma once

#include <optional>
#include <string>
#include <utility>

#include "rlsearch/instance.hpp"

namespace rls {

// Parsed benchmark file plus its header metadata. Benchmark instances are
// evaluated under the rounded Euclidean metric so listed optima are integers.
struct benchmark_instance {
  instance inst;
  std::string name;
  int dimension = 0;
  std::string edge_weight_type;
  std::optional<double> known_optimum;
};

benchmark_instance parse_tsplib(const std::string& text);
benchmark_instance parse_cvrplib(const std::string& text);

// Reads a benchmark file and dispatches on its TYPE keyword.
benchmark_instance load_benchmark(const std::string& path);

std::string write_tsplib(const instance& inst, const std::string& name);
std::string write_cvrplib(const instance& inst, const std::string& name);

// Reference optima for well-known benchmark instances (by name).
std::optional<double> known_optimum(const std::string& name);

// Native JSON representation used for generated instance files; unlike the
// benchmark formats it preserves the metric kind.
std::string write_instance_json(const instance& inst);
instance parse_instance_json(const std::string& text);

// Loads .json, .tsp or .vrp by extension (falling back to content sniffing).
instance load_instance(const std::string& path);
void save_instance(const instance& inst, const std::string& path);

// Uniform min-max scaling into the unit square (larger axis range wins, so
// relative geometry and argmin tours are preserved).
struct unit_scaling {
  double offset_x = 0;
  double offset_y = 0;
  double scale = 1;  // original = scaled * scale + offset
};
std::pair<instance, unit_scaling> scale_to_unit(const instance& inst);
point unscale(const unit_scaling& s, point p);

}  // namespace rls

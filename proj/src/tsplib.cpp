#include "rlsearch/tsplib.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "rlsearch/error.hpp"

namespace rls {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

struct section_line {
  int lineno;
  std::string text;
};

// Keyword/value header plus named sections, per the benchmark file layout:
// "KEY : VALUE" lines followed by section blocks terminated by the next
// keyword or EOF.
struct parsed_file {
  std::unordered_map<std::string, std::string> header;
  std::unordered_map<std::string, std::vector<section_line>> sections;
};

bool is_section_name(const std::string& word) {
  return word.size() > 8 && word.substr(word.size() - 8) == "_SECTION";
}

parsed_file split_file(const std::string& text) {
  parsed_file out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::string current_section;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty()) continue;
    const size_t colon = t.find(':');
    std::string first_word = upper(trim(t.substr(0, t.find_first_of(" \t:"))));
    if (first_word == "EOF") break;
    if (is_section_name(first_word)) {
      current_section = first_word;
      out.sections[current_section];
      continue;
    }
    if (colon != std::string::npos && !std::isdigit(static_cast<unsigned char>(t[0])) && t[0] != '-') {
      out.header[first_word] = trim(t.substr(colon + 1));
      current_section.clear();
      continue;
    }
    if (current_section.empty()) {
      fail(errc::parse_error, "line " + std::to_string(lineno) + ": data outside any section");
    }
    out.sections[current_section].push_back({lineno, t});
  }
  return out;
}

std::string header_or_fail(const parsed_file& f, const std::string& key) {
  const auto it = f.header.find(key);
  if (it == f.header.end()) fail(errc::parse_error, "missing header keyword " + key);
  return it->second;
}

int parse_dimension(const parsed_file& f) {
  const std::string dim = header_or_fail(f, "DIMENSION");
  try {
    return std::stoi(dim);
  } catch (const std::exception&) {
    fail(errc::parse_error, "bad DIMENSION value: " + dim);
  }
}

void check_edge_weight_type(const parsed_file& f) {
  const std::string ewt = upper(header_or_fail(f, "EDGE_WEIGHT_TYPE"));
  if (ewt != "EUC_2D") {
    fail(errc::unsupported_format, "unsupported EDGE_WEIGHT_TYPE " + ewt + " (only EUC_2D)");
  }
}

// NODE_COORD_SECTION rows are "id x y" with ids 1..dimension.
std::vector<point> parse_coords(const parsed_file& f, int dimension) {
  const auto it = f.sections.find("NODE_COORD_SECTION");
  if (it == f.sections.end()) fail(errc::parse_error, "missing NODE_COORD_SECTION");
  std::vector<point> coords(static_cast<size_t>(dimension));
  std::vector<uint8_t> seen(static_cast<size_t>(dimension), 0);
  int rows = 0;
  for (const auto& row : it->second) {
    std::istringstream ls(row.text);
    int id;
    double x, y;
    if (!(ls >> id >> x >> y)) {
      fail(errc::parse_error, "line " + std::to_string(row.lineno) + ": bad coordinate row");
    }
    if (id < 1 || id > dimension) {
      fail(errc::parse_error, "line " + std::to_string(row.lineno) + ": node id out of range (dimension mismatch)");
    }
    coords[static_cast<size_t>(id - 1)] = {x, y};
    seen[static_cast<size_t>(id - 1)] = 1;
    ++rows;
  }
  if (rows != dimension || std::count(seen.begin(), seen.end(), uint8_t{1}) != dimension) {
    fail(errc::parse_error, "coordinate count does not match DIMENSION " + std::to_string(dimension));
  }
  return coords;
}

}  // namespace

benchmark_instance parse_tsplib(const std::string& text) {
  const parsed_file f = split_file(text);
  const std::string type = upper(header_or_fail(f, "TYPE"));
  if (type != "TSP") fail(errc::unsupported_format, "TYPE " + type + " is not TSP");
  check_edge_weight_type(f);
  const int dimension = parse_dimension(f);
  std::vector<point> coords = parse_coords(f, dimension);

  benchmark_instance out;
  out.name = f.header.count("NAME") ? f.header.at("NAME") : "unnamed";
  out.dimension = dimension;
  out.edge_weight_type = "EUC_2D";
  out.inst = instance::make_tsp(std::move(coords), metric_kind::rounded_euclidean);
  out.inst.id = out.name;
  out.known_optimum = known_optimum(out.name);
  return out;
}

benchmark_instance parse_cvrplib(const std::string& text) {
  const parsed_file f = split_file(text);
  const std::string type = upper(header_or_fail(f, "TYPE"));
  if (type != "CVRP") fail(errc::unsupported_format, "TYPE " + type + " is not CVRP");
  check_edge_weight_type(f);
  const int dimension = parse_dimension(f);
  std::vector<point> coords = parse_coords(f, dimension);

  int capacity = 0;
  try {
    capacity = std::stoi(header_or_fail(f, "CAPACITY"));
  } catch (const error&) {
    throw;
  } catch (const std::exception&) {
    fail(errc::parse_error, "bad CAPACITY value");
  }

  std::vector<int> demands(static_cast<size_t>(dimension), 0);
  const auto dem = f.sections.find("DEMAND_SECTION");
  if (dem == f.sections.end()) fail(errc::parse_error, "missing DEMAND_SECTION");
  for (const auto& row : dem->second) {
    std::istringstream ls(row.text);
    int id, q;
    if (!(ls >> id >> q)) fail(errc::parse_error, "line " + std::to_string(row.lineno) + ": bad demand row");
    if (id < 1 || id > dimension) fail(errc::parse_error, "line " + std::to_string(row.lineno) + ": demand id out of range");
    demands[static_cast<size_t>(id - 1)] = q;
  }

  int depot = 0;
  const auto dep = f.sections.find("DEPOT_SECTION");
  if (dep != f.sections.end()) {
    for (const auto& row : dep->second) {
      std::istringstream ls(row.text);
      int id;
      if (!(ls >> id)) fail(errc::parse_error, "line " + std::to_string(row.lineno) + ": bad depot row");
      if (id == -1) break;
      depot = id - 1;
    }
  }

  benchmark_instance out;
  out.name = f.header.count("NAME") ? f.header.at("NAME") : "unnamed";
  out.dimension = dimension;
  out.edge_weight_type = "EUC_2D";
  out.inst = instance::make_cvrp(std::move(coords), std::move(demands), capacity, depot, metric_kind::rounded_euclidean);
  out.inst.id = out.name;
  out.known_optimum = known_optimum(out.name);
  return out;
}

benchmark_instance load_benchmark(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const parsed_file f = split_file(text);
  const std::string type = upper(header_or_fail(f, "TYPE"));
  if (type == "TSP") return parse_tsplib(text);
  if (type == "CVRP") return parse_cvrplib(text);
  fail(errc::unsupported_format, "unsupported TYPE " + type);
}

namespace {

std::string format_coord(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

std::string write_tsplib(const instance& inst, const std::string& name) {
  if (inst.kind() != problem_kind::tsp) fail(errc::invalid_argument, "write_tsplib requires a TSP instance");
  std::ostringstream out;
  out << "NAME : " << name << "\n";
  out << "TYPE : TSP\n";
  out << "DIMENSION : " << inst.n_locations() << "\n";
  out << "EDGE_WEIGHT_TYPE : EUC_2D\n";
  out << "NODE_COORD_SECTION\n";
  for (int v = 0; v < inst.n_locations(); ++v) {
    out << (v + 1) << " " << format_coord(inst.coord(v).x) << " " << format_coord(inst.coord(v).y) << "\n";
  }
  out << "EOF\n";
  return out.str();
}

std::string write_cvrplib(const instance& inst, const std::string& name) {
  if (inst.kind() != problem_kind::cvrp) fail(errc::invalid_argument, "write_cvrplib requires a CVRP instance");
  std::ostringstream out;
  out << "NAME : " << name << "\n";
  out << "TYPE : CVRP\n";
  out << "DIMENSION : " << inst.n_locations() << "\n";
  out << "EDGE_WEIGHT_TYPE : EUC_2D\n";
  out << "CAPACITY : " << inst.capacity() << "\n";
  out << "NODE_COORD_SECTION\n";
  for (int v = 0; v < inst.n_locations(); ++v) {
    out << (v + 1) << " " << format_coord(inst.coord(v).x) << " " << format_coord(inst.coord(v).y) << "\n";
  }
  out << "DEMAND_SECTION\n";
  for (int v = 0; v < inst.n_locations(); ++v) {
    out << (v + 1) << " " << inst.demand(v) << "\n";
  }
  out << "DEPOT_SECTION\n";
  out << (inst.depot() + 1) << "\n";
  out << "-1\n";
  out << "EOF\n";
  return out.str();
}

std::optional<double> known_optimum(const std::string& name) {
  // Published optima for the benchmark instances referenced in-repo.
  static const std::unordered_map<std::string, double> table = {
      {"eil51", 426},         {"berlin52", 7542},     {"st70", 675},         {"eil76", 538},
      {"pr76", 108159},       {"rat99", 1211},        {"kroA100", 21282},    {"kroB100", 22141},
      {"kroC100", 20749},     {"kroD100", 21294},     {"kroE100", 22068},    {"rd100", 7910},
      {"eil101", 629},        {"lin105", 14379},      {"pr107", 44303},      {"pr124", 59030},
      {"bier127", 118282},    {"ch130", 6110},        {"pr136", 96772},      {"pr144", 58537},
      {"ch150", 6528},        {"kroA150", 26524},     {"kroB150", 26130},    {"pr152", 73682},
      {"u159", 42080},        {"rat195", 2323},       {"d198", 15780},       {"kroA200", 29368},
      {"kroB200", 29437},     {"ts225", 126643},      {"tsp225", 3916},      {"pr226", 80369},
      {"gil262", 2378},       {"pr264", 49135},       {"a280", 2579},        {"pr299", 48191},
      {"X-n101-k25", 27591},  {"X-n106-k14", 26362},  {"X-n110-k13", 14971}, {"X-n115-k10", 12747},
      {"X-n120-k6", 13332},   {"X-n125-k30", 55539},  {"X-n129-k18", 28940}, {"X-n134-k13", 10916},
      {"X-n139-k10", 13590},  {"X-n143-k7", 15700},   {"X-n148-k46", 43448}, {"X-n153-k22", 21220},
      {"X-n157-k13", 16876},  {"X-n162-k11", 14138},  {"X-n167-k10", 20557}, {"X-n172-k51", 45607},
      {"X-n176-k26", 47812},  {"X-n181-k23", 25569},  {"X-n186-k15", 24145}, {"X-n190-k8", 16980},
      {"X-n195-k51", 44225},  {"X-n200-k36", 58578},
  };
  const auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::string write_instance_json(const instance& inst) {
  nlohmann::json j;
  j["kind"] = inst.kind() == problem_kind::tsp ? "tsp" : "cvrp";
  j["metric"] = inst.metric() == metric_kind::euclidean ? "euclidean" : "rounded";
  j["id"] = inst.id;
  nlohmann::json coords = nlohmann::json::array();
  for (const auto& p : inst.coords()) coords.push_back({p.x, p.y});
  j["coords"] = std::move(coords);
  if (inst.kind() == problem_kind::cvrp) {
    j["demands"] = inst.demands();
    j["capacity"] = inst.capacity();
    j["depot"] = inst.depot();
  }
  return j.dump(2);
}

instance parse_instance_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(errc::parse_error, std::string("bad instance json: ") + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const metric_kind metric =
        j.value("metric", std::string("euclidean")) == "rounded" ? metric_kind::rounded_euclidean : metric_kind::euclidean;
    std::vector<point> coords;
    for (const auto& row : j.at("coords")) coords.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
    instance inst = kind == "tsp"
                        ? instance::make_tsp(std::move(coords), metric)
                        : instance::make_cvrp(std::move(coords), j.at("demands").get<std::vector<int>>(),
                                              j.at("capacity").get<int>(), j.at("depot").get<int>(), metric);
    inst.id = j.value("id", std::string());
    return inst;
  } catch (const error&) {
    throw;
  } catch (const std::exception& e) {
    fail(errc::parse_error, std::string("bad instance json: ") + e.what());
  }
}

instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const size_t dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "json" || (!text.empty() && text.front() == '{')) return parse_instance_json(text);
  if (ext == "vrp") return parse_cvrplib(text).inst;
  if (ext == "tsp") return parse_tsplib(text).inst;
  // fall back on the TYPE keyword
  const parsed_file f = split_file(text);
  const std::string type = upper(header_or_fail(f, "TYPE"));
  return type == "CVRP" ? parse_cvrplib(text).inst : parse_tsplib(text).inst;
}

void save_instance(const instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot write " + path);
  const size_t dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::string name = inst.id.empty() ? "instance" : inst.id;
  if (ext == "tsp") {
    out << write_tsplib(inst, name);
  } else if (ext == "vrp") {
    out << write_cvrplib(inst, name);
  } else {
    out << write_instance_json(inst);
  }
  if (!out) fail(errc::io_error, "write failed for " + path);
}

std::pair<instance, unit_scaling> scale_to_unit(const instance& inst) {
  double min_x = inst.coord(0).x, max_x = min_x;
  double min_y = inst.coord(0).y, max_y = min_y;
  for (const auto& p : inst.coords()) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double range = std::max(max_x - min_x, max_y - min_y);
  unit_scaling s{min_x, min_y, range > 0 ? range : 1.0};
  std::vector<point> coords;
  coords.reserve(inst.coords().size());
  for (const auto& p : inst.coords()) coords.push_back({(p.x - s.offset_x) / s.scale, (p.y - s.offset_y) / s.scale});
  instance scaled = inst.kind() == problem_kind::tsp
                        ? instance::make_tsp(std::move(coords), metric_kind::euclidean)
                        : instance::make_cvrp(std::move(coords), inst.demands(), inst.capacity(), inst.depot(),
                                              metric_kind::euclidean);
  scaled.id = inst.id;
  return {std::move(scaled), s};
}

point unscale(const unit_scaling& s, point p) { return {p.x * s.scale + s.offset_x, p.y * s.scale + s.offset_y}; }

}  // namespace rls

#include "rlsearch/results.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rlsearch/error.hpp"

namespace rls {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

namespace {

void write_header(std::ostream& out) { out << "instance_id,method,T,seed,cost,ref,gap,runtime_ms\n"; }

void write_row(std::ostream& out, const result_record& r) {
  out << r.instance_id << ',' << r.method << ',' << r.steps << ',' << r.seed << ',' << fmt_double(r.cost) << ',';
  if (r.ref) out << fmt_double(*r.ref);
  out << ',';
  if (const auto g = r.gap()) out << fmt_double(*g);
  out << ',' << fmt_double(r.runtime_ms) << '\n';
}

}  // namespace

void write_results(const std::vector<result_record>& records, std::ostream& out) {
  write_header(out);
  for (const auto& r : records) write_row(out, r);
}

struct results_writer::impl {
  std::ofstream out;
};

results_writer::results_writer(const std::string& path) : impl_(new impl) {
  impl_->out.open(path);
  if (!impl_->out) {
    delete impl_;
    impl_ = nullptr;
    fail(errc::io_error, "cannot write " + path);
  }
  write_header(impl_->out);
}

results_writer::~results_writer() { delete impl_; }

void results_writer::append(const result_record& record) {
  if (impl_ == nullptr) fail(errc::io_error, "results writer is closed");
  write_row(impl_->out, record);
  if (!impl_->out) fail(errc::io_error, "results write failed");
}

void results_writer::close() {
  if (impl_ != nullptr) {
    impl_->out.close();
    delete impl_;
    impl_ = nullptr;
  }
}

void write_results_file(const std::vector<result_record>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot write " + path);
  write_results(records, out);
  if (!out) fail(errc::io_error, "write failed for " + path);
}

std::vector<result_record> read_results(std::istream& in) {
  std::vector<result_record> out;
  std::string line;
  if (!std::getline(in, line)) fail(errc::parse_error, "empty results file");
  if (line != "instance_id,method,T,seed,cost,ref,gap,runtime_ms") {
    fail(errc::parse_error, "unexpected results header: " + line);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 8) fail(errc::parse_error, "bad results row: " + line);
    result_record r;
    r.instance_id = fields[0];
    r.method = fields[1];
    r.steps = std::stol(fields[2]);
    r.seed = std::stoull(fields[3]);
    r.cost = std::stod(fields[4]);
    if (!fields[5].empty()) r.ref = std::stod(fields[5]);
    r.runtime_ms = std::stod(fields[7]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<result_record> read_results_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);
  return read_results(in);
}

}  // namespace rls

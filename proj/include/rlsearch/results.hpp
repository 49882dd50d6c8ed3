#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rls {

// One solve outcome. gap is derived from cost and ref when ref is present.
struct result_record {
  std::string instance_id;
  std::string method;
  long steps = 0;
  uint64_t seed = 0;
  double cost = 0;
  std::optional<double> ref;
  double runtime_ms = 0;
  std::optional<double> gap() const {
    if (!ref || *ref == 0) return std::nullopt;
    return (cost - *ref) / *ref;
  }
};

// CSV with header instance_id,method,T,seed,cost,ref,gap,runtime_ms.
void write_results(const std::vector<result_record>& records, std::ostream& out);
void write_results_file(const std::vector<result_record>& records, const std::string& path);
std::vector<result_record> read_results(std::istream& in);
std::vector<result_record> read_results_file(const std::string& path);

// Streaming single-writer variant of the same format.
class results_writer {
public:
  explicit results_writer(const std::string& path);
  ~results_writer();
  results_writer(const results_writer&) = delete;
  results_writer& operator=(const results_writer&) = delete;
  results_writer(results_writer&& other) noexcept : impl_(other.impl_) { other.impl_ = nullptr; }

  void append(const result_record& record);
  void close();

private:
  struct impl;
  impl* impl_;
};

}  // namespace rls

#pragma once

#include <stdexcept>
#include <string>

namespace rls {

enum class errc {
  invalid_argument,
  infeasible_solution,
  degenerate_action,
  masked_action,
  no_feasible_action,
  parse_error,
  unsupported_format,
  io_error,
  numeric_error,
};

// All recoverable failures in the library surface as rls::error; the code is
// stable and mapped one-to-one onto the C API status codes.
class error : public std::runtime_error {
public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace rls

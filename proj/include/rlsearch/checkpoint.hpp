#pragma once

#include <cstdint>
#include <string>

#include "rlsearch/network.hpp"

namespace rls {

// Versioned binary container holding the architecture header and the named
// actor/critic tensors as little-endian 64-bit floats. Byte layout documented
// in docs/formats.md.
struct checkpoint {
  net_config config;
  uint32_t epoch = 0;
  param_set actor;
  param_set critic;
};

checkpoint make_checkpoint(const net_config& cfg, uint64_t init_seed);

void save_checkpoint(const checkpoint& ckpt, const std::string& path);
checkpoint load_checkpoint(const std::string& path);

}  // namespace rls

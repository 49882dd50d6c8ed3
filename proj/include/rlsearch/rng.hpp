#pragma once

#include <cstdint>
#include <vector>

namespace rls {

// xoshiro256** seeded through splitmix64. Self-contained so that seeded runs
// reproduce bit-exactly regardless of the standard library in use.
class rng {
public:
  explicit rng(uint64_t seed) : seed_(seed) {
    uint64_t x = seed;
    for (auto& word : s_) {
      // splitmix64 step
      x += 0x9e3779b97f4a7c15ULL;
      uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], inclusive.
  int next_int(int lo, int hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  // Independent child stream; deterministic in (seed, stream).
  rng fork(uint64_t stream) const { return rng(seed_ ^ (0x9e3779b97f4a7c15ULL + stream * 0xd1342543de82ef95ULL)); }

  uint64_t seed() const { return seed_; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (int k = static_cast<int>(items.size()) - 1; k > 0; --k) {
      std::swap(items[k], items[next_int(0, k)]);
    }
  }

private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
  uint64_t seed_;
};

}  // namespace rls

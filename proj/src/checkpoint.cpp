#include "rlsearch/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "rlsearch/error.hpp"

namespace rls {

namespace {

constexpr char kMagic[4] = {'R', 'L', 'S', 'C'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void put_f64(std::string& out, double v) {
  const uint64_t bits = std::bit_cast<uint64_t>(v);
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
}

class reader {
public:
  reader(const std::string& buf, const std::string& path) : buf_(buf), path_(path) {}

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<uint32_t>(static_cast<unsigned char>(buf_[pos_ + k])) << (8 * k);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf_[pos_ + k])) << (8 * k);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(buf_[pos_++]);
  }
  std::string str(size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == buf_.size(); }

private:
  void need(size_t n) {
    if (pos_ + n > buf_.size()) fail(errc::parse_error, "truncated checkpoint " + path_);
  }
  const std::string& buf_;
  std::string path_;
  size_t pos_ = 0;
};

void put_params(std::string& out, const param_set& params) {
  put_u32(out, static_cast<uint32_t>(params.tensors.size()));
  for (const auto& t : params.tensors) {
    put_u32(out, static_cast<uint32_t>(t.name.size()));
    out.append(t.name);
    put_u32(out, static_cast<uint32_t>(t.rows));
    put_u32(out, static_cast<uint32_t>(t.cols));
    out.push_back(t.trainable ? 1 : 0);
    for (double v : t.v) put_f64(out, v);
  }
}

// Reads tensors into the expected (builder-produced) set, matching by name.
void get_params(reader& in, param_set& expected, const std::string& path) {
  const uint32_t count = in.u32();
  if (count != expected.tensors.size()) fail(errc::parse_error, "tensor count mismatch in " + path);
  for (uint32_t k = 0; k < count; ++k) {
    const uint32_t name_len = in.u32();
    const std::string name = in.str(name_len);
    const uint32_t rows = in.u32();
    const uint32_t cols = in.u32();
    const uint8_t trainable = in.u8();
    const int idx = expected.index_of(name);
    if (idx < 0) fail(errc::parse_error, "unexpected tensor " + name + " in " + path);
    tensor& t = expected.tensors[static_cast<size_t>(idx)];
    if (t.rows != static_cast<int>(rows) || t.cols != static_cast<int>(cols) || t.trainable != (trainable != 0)) {
      fail(errc::parse_error, "tensor shape mismatch for " + name + " in " + path);
    }
    for (auto& v : t.v) v = in.f64();
  }
}

}  // namespace

checkpoint make_checkpoint(const net_config& cfg, uint64_t init_seed) {
  checkpoint ckpt;
  ckpt.config = cfg;
  ckpt.actor = make_actor_params(cfg);
  ckpt.critic = make_critic_params(cfg);
  rng r(init_seed);
  init_params(ckpt.actor, r);
  init_params(ckpt.critic, r);
  return ckpt;
}

void save_checkpoint(const checkpoint& ckpt, const std::string& path) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  out.push_back(ckpt.config.kind == problem_kind::tsp ? 0 : 1);
  put_u32(out, static_cast<uint32_t>(ckpt.config.feature_dim));
  put_u32(out, static_cast<uint32_t>(ckpt.config.d_model));
  put_u32(out, static_cast<uint32_t>(ckpt.config.n_blocks));
  put_u32(out, static_cast<uint32_t>(ckpt.config.hidden));
  put_f64(out, ckpt.config.clip);
  put_u32(out, ckpt.epoch);
  put_params(out, ckpt.actor);
  put_params(out, ckpt.critic);

  std::ofstream f(path, std::ios::binary);
  if (!f) fail(errc::io_error, "cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(errc::io_error, "write failed for " + path);
}

checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(errc::io_error, "cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  reader in(buf, path);
  if (in.str(4) != std::string(kMagic, 4)) fail(errc::parse_error, "not a checkpoint file: " + path);
  if (in.u32() != kVersion) fail(errc::parse_error, "unsupported checkpoint version in " + path);

  checkpoint ckpt;
  ckpt.config.kind = in.u8() == 0 ? problem_kind::tsp : problem_kind::cvrp;
  ckpt.config.feature_dim = static_cast<int>(in.u32());
  ckpt.config.d_model = static_cast<int>(in.u32());
  ckpt.config.n_blocks = static_cast<int>(in.u32());
  ckpt.config.hidden = static_cast<int>(in.u32());
  ckpt.config.clip = in.f64();
  ckpt.epoch = in.u32();
  ckpt.actor = make_actor_params(ckpt.config);
  ckpt.critic = make_critic_params(ckpt.config);
  get_params(in, ckpt.actor, path);
  get_params(in, ckpt.critic, path);
  if (!in.done()) fail(errc::parse_error, "trailing bytes in " + path);
  return ckpt;
}

}  // namespace rls

#include "pcd/random.hpp"

#include <cmath>
#include <numbers>

namespace pcd {
namespace {

constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;
constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                    std::uint32_t& hi) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

// splitmix64 finalizer; mixes the domain tag into the user seed.
std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t tag,
                          std::uint64_t index) noexcept {
  return mix64(mix64(seed ^ (static_cast<std::uint64_t>(tag) << 48)) + index);
}

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMulA, ctr[0], lo0, hi0);
    mulhilo(kMulB, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

CounterStream::CounterStream(std::uint64_t seed, StreamDomain domain,
                             StreamId id) noexcept {
  const std::uint64_t k =
      mix64(seed ^ (static_cast<std::uint64_t>(domain) << 56));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  ctr_ = {0u, id.step, id.variable, id.sample};
}

std::uint32_t CounterStream::next_u32() noexcept {
  if (used_ == 4) {
    block_ = Philox4x32::generate(ctr_, key_);
    ++ctr_[0];
    used_ = 0;
  }
  return block_[used_++];
}

double CounterStream::uniform() noexcept {
  // 53 random bits, offset by half an ulp so 0 is never produced.
  const std::uint64_t hi = next_u32() >> 5;
  const std::uint64_t lo = next_u32() >> 6;
  return (static_cast<double>((hi << 26) | lo) + 0.5) * 0x1.0p-53;
}

double CounterStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void CounterStream::fill_normal(Eigen::Ref<Eigen::VectorXd> out) noexcept {
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal();
}

Eigen::VectorXd normal_vector(std::uint64_t seed, StreamDomain domain,
                              StreamId id, Eigen::Index n) {
  Eigen::VectorXd v(n);
  CounterStream(seed, domain, id).fill_normal(v);
  return v;
}

}  // namespace pcd

#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

namespace pcd {

/// Philox4x32-10 block cipher (Salmon et al., SC'11). Stateless: the output
/// is a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept;
};

/// Purpose tags keep independent consumers of one master seed apart.
enum class StreamDomain : std::uint32_t {
  Sampler = 1,
  Scenario = 2,
  Test = 3,
};

/// Stream address inside a run: every (sample, variable, step) triple owns
/// its own sequence, so draws never depend on scheduling order.
struct StreamId {
  std::uint32_t sample = 0;
  std::uint32_t variable = 0;
  std::uint32_t step = 0;
};

/// Sequential view over one counter-based stream.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, StreamDomain domain, StreamId id) noexcept;

  std::uint32_t next_u32() noexcept;
  /// Uniform in the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;
  void fill_normal(Eigen::Ref<Eigen::VectorXd> out) noexcept;

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Child seed for sub-run `index` under purpose `tag`; distinct (tag, index)
/// pairs give unrelated seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t tag, std::uint64_t index) noexcept;

/// Standard-normal vector of length `n` from stream `id`.
Eigen::VectorXd normal_vector(std::uint64_t seed, StreamDomain domain,
                              StreamId id, Eigen::Index n);

}  // namespace pcd

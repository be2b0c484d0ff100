#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace steinlab {

// mt19937_64 keyed by (seed, substream) through seed_seq; both are fully
// specified by the standard, so draws are identical across toolchains.
// The distribution transforms below are written out for the same reason
// (std::normal_distribution and friends are implementation-defined).
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t substream = 0);

  std::uint64_t next_u64() { return engine_(); }

  // uniform on the open interval (0, 1)
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double exponential() { return -std::log(uniform()); }
  double gamma(double shape);
  double beta(double a, double b);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t substream() const { return substream_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t substream_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derive a child substream id; used to split one logical stream into blocks.
std::uint64_t mix_substream(std::uint64_t base, std::uint64_t index);

}  // namespace steinlab

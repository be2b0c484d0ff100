#pragma once

#include "steinlab/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>

namespace steinlab {

// Worker count used by parallel_for; 1 by default.
void set_workers(int n);
int workers();

// body(i) for every i in [0, count). Indices are handed out dynamically, so
// bodies must write only to their own slot.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

inline constexpr std::size_t kMcChunk = 4096;

// Sample mean and covariance of a vector statistic.
struct McMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::size_t n = 0;

  double std_error(Eigen::Index i) const;
  // standard error of <w, mean>
  double std_error(const Eigen::VectorXd& w) const;
};

// Monte Carlo over `budget` draws of stat(rng) -> k-vector. Draws are split
// into fixed chunks of kMcChunk; chunk c runs on Rng(seed, mix_substream(substream, c))
// and chunks are merged in index order, so the result does not depend on the
// worker count.
McMoments mc_moments(std::size_t budget, std::uint64_t seed, std::uint64_t substream, int k,
                     const std::function<Eigen::VectorXd(Rng&)>& stat);

}  // namespace steinlab

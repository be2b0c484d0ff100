#include "steinlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace steinlab {

namespace {
std::atomic<int> g_workers{1};
}

void set_workers(int n) {
  if (n < 1) throw std::invalid_argument("set_workers: need at least one worker");
  g_workers = n;
}

int workers() { return g_workers; }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers()), count);
  if (nw <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto run = [&]() {
    for (;;) {
      const std::size_t i = next++;
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < nw; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double McMoments::std_error(Eigen::Index i) const {
  return n > 1 ? std::sqrt(std::max(cov(i, i), 0.0) / static_cast<double>(n)) : 0.0;
}

double McMoments::std_error(const Eigen::VectorXd& w) const {
  return n > 1 ? std::sqrt(std::max(w.dot(cov * w), 0.0) / static_cast<double>(n)) : 0.0;
}

McMoments mc_moments(std::size_t budget, std::uint64_t seed, std::uint64_t substream, int k,
                     const std::function<Eigen::VectorXd(Rng&)>& stat) {
  if (budget < 1) throw std::invalid_argument("mc_moments: budget must be positive");
  const std::size_t chunks = (budget + kMcChunk - 1) / kMcChunk;
  struct Partial {
    Eigen::VectorXd mean;
    Eigen::MatrixXd m2;
    std::size_t n = 0;
  };
  std::vector<Partial> parts(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(seed, mix_substream(substream, c));
    const std::size_t len = std::min(kMcChunk, budget - c * kMcChunk);
    Partial p;
    p.mean = Eigen::VectorXd::Zero(k);
    p.m2 = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t i = 0; i < len; ++i) {
      const Eigen::VectorXd s = stat(rng);
      ++p.n;
      const Eigen::VectorXd delta = s - p.mean;
      p.mean += delta / static_cast<double>(p.n);
      p.m2 += delta * (s - p.mean).transpose();
    }
    parts[c] = std::move(p);
  });
  McMoments out;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(k, k);
  std::size_t n = 0;
  for (const auto& p : parts) {
    const std::size_t nn = n + p.n;
    const Eigen::VectorXd delta = p.mean - mean;
    const double fa = static_cast<double>(n), fb = static_cast<double>(p.n);
    mean += delta * (fb / static_cast<double>(nn));
    m2 += p.m2 + delta * delta.transpose() * (fa * fb / static_cast<double>(nn));
    n = nn;
  }
  out.mean = mean;
  out.n = n;
  out.cov = n > 1 ? Eigen::MatrixXd(m2 / static_cast<double>(n - 1)) : Eigen::MatrixXd::Zero(k, k);
  return out;
}

}  // namespace steinlab

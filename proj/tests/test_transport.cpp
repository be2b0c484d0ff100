#include "oracles.hpp"
#include "steinlab/measures.hpp"
#include "steinlab/transport.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace steinlab;

namespace {

Eigen::MatrixXd gaussian_rows(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double shift = 0.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = nd(gen);
  m.col(0).array() += shift;
  return m;
}

// brute force over all permutations
double w1_brute(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  std::vector<int> perm(static_cast<std::size_t>(a.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) c += (a.row(static_cast<Eigen::Index>(i)) - b.row(perm[i])).norm();
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.rows());
}

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("exact one-dimensional W1") {
  const Eigen::MatrixXd a = gaussian_rows(200, 1, 1);
  CHECK(w1_exact_1d(EmpiricalPair(a, a)) == 0.0);
  CHECK(w1_exact_1d(EmpiricalPair(Eigen::MatrixXd::Zero(7, 1), Eigen::MatrixXd::Ones(7, 1))) == doctest::Approx(1.0));
  for (std::uint64_t s = 0; s < 5; ++s) {
    const EmpiricalPair p(gaussian_rows(150, 1, 10 + s), gaussian_rows(150, 1, 20 + s, 0.3));
    CHECK(std::abs(w1_exact_1d(p) - w1_exact_assignment(p)) <= 1e-9);
  }
  CHECK_THROWS(EmpiricalPair(gaussian_rows(5, 1, 1), gaussian_rows(6, 1, 2)));
  CHECK_THROWS(w1_exact_1d(EmpiricalPair(gaussian_rows(5, 2, 1), gaussian_rows(5, 2, 2))));
}

TEST_CASE("exact assignment W1") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 0, 1, 0;
  b << 0, 1, 1, 1;
  CHECK(w1_exact_assignment(EmpiricalPair(a, b)) == doctest::Approx(1.0).epsilon(1e-12));

  const Eigen::MatrixXd x = gaussian_rows(60, 3, 3);
  std::vector<Eigen::Index> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(4));
  Eigen::MatrixXd y(60, 3);
  for (Eigen::Index i = 0; i < 60; ++i) y.row(perm[static_cast<std::size_t>(i)]) = x.row(i);
  CHECK(w1_exact_assignment(EmpiricalPair(x, y)) <= 1e-12);
  const auto match = optimal_assignment(EmpiricalPair(x, y));
  for (Eigen::Index i = 0; i < 60; ++i) CHECK(match[static_cast<std::size_t>(i)] == perm[static_cast<std::size_t>(i)]);

  for (std::uint64_t s = 0; s < 10; ++s) {
    const Eigen::MatrixXd p = gaussian_rows(7, 2, 100 + s), q = gaussian_rows(7, 2, 200 + s, 0.5);
    CHECK(w1_exact_assignment(EmpiricalPair(p, q)) == doctest::Approx(w1_brute(p, q)).epsilon(1e-12));
  }
  CHECK_THROWS(w1_exact_assignment(EmpiricalPair(Eigen::MatrixXd::Zero(kAssignmentGuard + 1, 1),
                                                 Eigen::MatrixXd::Zero(kAssignmentGuard + 1, 1))));
}

TEST_CASE("metric axioms and scaling") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Eigen::MatrixXd x = gaussian_rows(48, 3, 300 + s), y = gaussian_rows(48, 3, 400 + s, 0.4),
                          z = gaussian_rows(48, 3, 500 + s, -0.2);
    const double xy = w1_exact_assignment(EmpiricalPair(x, y));
    CHECK(xy == w1_exact_assignment(EmpiricalPair(y, x)));
    const double yz = w1_exact_assignment(EmpiricalPair(y, z)), xz = w1_exact_assignment(EmpiricalPair(x, z));
    CHECK(xz <= xy + yz + 1e-9);
  }
  const Eigen::MatrixXd a = gaussian_rows(64, 2, 7), b = gaussian_rows(64, 2, 8, 1.0);
  const double c = 2.5;
  CHECK(w1_exact_assignment(EmpiricalPair(c * a, c * b)) ==
        doctest::Approx(c * w1_exact_assignment(EmpiricalPair(a, b))).epsilon(1e-12));
  const Eigen::MatrixXd a1 = gaussian_rows(300, 1, 9), b1 = gaussian_rows(300, 1, 10, 0.2);
  CHECK(w1_exact_1d(EmpiricalPair(c * a1, c * b1)) == doctest::Approx(c * w1_exact_1d(EmpiricalPair(a1, b1))).epsilon(1e-12));
  // eps scaled with the data leaves the entropic plan unchanged
  const auto s1 = w1_sinkhorn(EmpiricalPair(a, b), 1e-2);
  const auto sc = w1_sinkhorn(EmpiricalPair(c * a, c * b), c * 1e-2);
  CHECK(sc.value == doctest::Approx(c * s1.value).epsilon(1e-3));
}

TEST_CASE("Sinkhorn") {
  const Eigen::MatrixXd a = gaussian_rows(128, 2, 11), b = gaussian_rows(128, 2, 12, 0.5);
  const auto self = w1_sinkhorn(EmpiricalPair(a, a), 1e-3);
  CHECK(std::abs(self.value) <= 1e-6);

  const EmpiricalPair p(a, b);
  const double exact = w1_exact_assignment(p);
  double previous = std::numeric_limits<double>::infinity();
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto r = w1_sinkhorn(p, eps);
    const double err = std::abs(r.value - exact);
    CHECK(err <= previous + 1e-9);
    previous = err;
    CHECK(r.primal_upper >= exact - 1e-9);
    CHECK(r.duality_gap >= 0.0);
    CHECK(r.bias_bound == doctest::Approx(2.0 * eps * std::log(128.0)));
    CHECK(exact <= r.value + r.duality_gap + r.bias_bound + 1e-9);
  }
  CHECK(previous <= 1e-2);
  CHECK_THROWS(w1_sinkhorn(p, 0.0));
  CHECK_THROWS_AS(w1_sinkhorn(p, 1e-3, 3), std::runtime_error);
}

TEST_CASE("dual lower bound") {
  const auto dict = lipschitz_dictionary(2);
  for (const auto& h : dict) CHECK(h.lipschitz <= 1.0);
  std::vector<TestFunction> axis{TestFunction::coordinate(2, 0)};

  const double m = 0.5;
  const EmpiricalPair shifted(gaussian_rows(4000, 2, 13, m), gaussian_rows(4000, 2, 14));
  const auto lin = w1_dual_lower_bound(shifted, axis);
  CHECK(std::abs(lin.value - m) <= 3.0 * lin.std_error);
  CHECK(w1_dual_lower_bound(shifted, dict).value >= lin.value);

  const EmpiricalPair same(gaussian_rows(4000, 2, 15), gaussian_rows(4000, 2, 16));
  const auto zero = w1_dual_lower_bound(same, axis);
  CHECK(zero.value <= 3.0 * zero.std_error);

  // lower bound <= exact <= Sinkhorn + gap + bias
  for (std::uint64_t s = 0; s < 5; ++s) {
    const EmpiricalPair p(gaussian_rows(200, 2, 600 + s, 0.3 * s), gaussian_rows(200, 2, 700 + s));
    const double exact = w1_exact_assignment(p);
    CHECK(w1_dual_lower_bound(p, dict).value <= exact + 1e-12);
    const auto sk = w1_sinkhorn(p, 1e-2);
    CHECK(exact <= sk.value + sk.duality_gap + sk.bias_bound + 1e-9);
  }
}

TEST_CASE("Gaussian mollification") {
  CHECK(gaussian_norm_mean(1) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-12));
  CHECK(gaussian_norm_mean(2) == doctest::Approx(std::sqrt(std::numbers::pi / 2.0)).epsilon(1e-12));
  CHECK(gaussian_norm_mean(3) == doctest::Approx(2.0 * std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-12));

  const auto lin = TestFunction::coordinate(2, 1);
  const auto lin_eps = mollify_lipschitz(lin, 0.3, 512);
  for (double t : {-2.0, 0.0, 1.5}) CHECK(std::abs(lin_eps(Eigen::Vector2d(0.7, t)) - t) <= 1e-12);

  // E|x - s Z| = s sqrt(2/pi) e^{-x^2 / 2s^2} + x (1 - 2 Phi(-x/s))
  const double eps = 1e-4, s = std::sqrt(eps);
  auto abs_fn = TestFunction::callback(
      1, [](const Eigen::VectorXd& x) { return std::abs(x(0)); }, {}, {}, "abs");
  abs_fn.lipschitz = 1.0;
  const auto smooth = mollify_lipschitz(abs_fn, eps);
  double worst = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double x = -0.05 + 0.1 * i / 400.0;
    const double ref = s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-x * x / (2 * eps)) + x * (1.0 - 2.0 * phi_cdf(-x / s));
    CHECK(std::abs(smooth.at(x) - ref) <= 1e-6);
    worst = std::max(worst, std::abs(smooth.at(x) - std::abs(x)));
  }
  CHECK(worst <= std::sqrt(2.0 / std::numbers::pi) * 1e-2);
  CHECK(worst == doctest::Approx(s * std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-3));

  // difference quotients of the mollified 2D dictionary
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd;
  const auto dict = lipschitz_dictionary(2);
  for (std::size_t k = 0; k < dict.size(); k += 5) {
    const auto h = mollify_lipschitz(dict[k], 0.01, 256);
    CHECK(h.lipschitz <= 1.0);
    for (int i = 0; i < 50; ++i) {
      const Eigen::Vector2d x(nd(gen), nd(gen)), y(nd(gen), nd(gen));
      CHECK(std::abs(h(x) - h(y)) <= (1.0 + 1e-8) * (x - y).norm());
      CHECK(std::abs(h(x) - dict[k](x)) <= gaussian_norm_mean(2) * 0.1 + 1e-12);
    }
  }
}

#include "steinlab/io.hpp"
#include "steinlab/measures.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace steinlab;

namespace {

// mean of cos and sin of <xi, row>, with the larger of the two standard errors
struct CfEstimate {
  std::complex<double> value;
  double std_error;
};

CfEstimate cf_estimate(const Eigen::MatrixXd& data, const Eigen::VectorXd& xi) {
  const Eigen::ArrayXd ph = (data * xi).array();
  const Eigen::ArrayXd c = ph.cos(), s = ph.sin();
  const double n = static_cast<double>(data.rows());
  const double vc = (c - c.mean()).square().sum() / (n - 1), vs = (s - s.mean()).square().sum() / (n - 1);
  return {{c.mean(), s.mean()}, std::sqrt(std::max(vc, vs) / n)};
}

std::vector<Eigen::VectorXd> fixed_frequencies(int d, int count) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd xi(d);
    for (int k = 0; k < d; ++k) xi(k) = u(gen);
    out.push_back(xi);
  }
  return out;
}

}  // namespace

TEST_CASE("Gaussian sample covariance") {
  const auto b = sample(MeasureSpec::gaussian(Eigen::MatrixXd::Identity(2, 2)), 100000, 1);
  const Eigen::MatrixXd c = b.data.transpose() * b.data / 100000.0;
  // Var(X_i^2) = 2, Var(X_1 X_2) = 1
  CHECK(std::abs(c(0, 0) - 1.0) <= 3.0 * std::sqrt(2.0 / 1e5));
  CHECK(std::abs(c(1, 1) - 1.0) <= 3.0 * std::sqrt(2.0 / 1e5));
  CHECK(std::abs(c(0, 1)) <= 3.0 * std::sqrt(1.0 / 1e5));
}

TEST_CASE("rotation-invariant stable characteristic function") {
  const auto b = sample(MeasureSpec::stable_rot_inv(1.5, 1), 100000, 2);
  const auto e = cf_estimate(b.data, Eigen::VectorXd::Ones(1));
  CHECK(std::abs(e.value.real() - std::exp(-0.5)) <= 3.0 * e.std_error);
}

TEST_CASE("centered exponential moments") {
  const auto b = sample(MeasureSpec::centered_exponential(1), 100000, 3);
  const Eigen::ArrayXd x = b.data.col(0).array();
  // E X = 0, E X^2 = 1, Var X^2 = E (E - 1)^4 - 1 = 8
  CHECK(std::abs(x.mean()) <= 3.0 * std::sqrt(1.0 / 1e5));
  CHECK(std::abs(x.square().mean() - 1.0) <= 3.0 * std::sqrt(8.0 / 1e5));
}

TEST_CASE("closed-form characteristic functions") {
  Eigen::VectorXd xi(3);
  xi << 0.3, -1.0, 0.5;
  CHECK(std::abs(characteristic_function(MeasureSpec::gaussian(Eigen::MatrixXd::Identity(3, 3)), xi) -
                 std::exp(-0.5 * xi.squaredNorm())) <= 1e-15);
  for (const auto& spec : {MeasureSpec::gaussian(Eigen::MatrixXd::Identity(2, 2)),
                           MeasureSpec::stable(1.5, SpectralMeasure::axes(2, 0.25)),
                           MeasureSpec::stable_rot_inv(1.3, 2)})
    CHECK(std::abs(characteristic_function(spec, Eigen::VectorXd::Zero(2)) - 1.0) <= 1e-15);
  // atoms +-e1 with weight 1/4: exp(-2 * 1/4 * |1|^1.5)
  CHECK(std::abs(characteristic_function(MeasureSpec::stable(1.5, SpectralMeasure::standard_1d()),
                                         Eigen::VectorXd::Ones(1)) -
                 std::exp(-0.5)) <= 1e-15);
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(2, 0);
  const auto spec2 = MeasureSpec::stable(1.5, SpectralMeasure::axes(2, 0.25));
  CHECK(std::abs(characteristic_function(spec2, e1) - std::exp(-0.5)) <= 1e-15);
  const auto e = cf_estimate(sample(spec2, 100000, 4).data, e1);
  CHECK(std::abs(e.value - std::exp(-0.5)) <= 4.0 * e.std_error);
  CHECK_THROWS(characteristic_function(MeasureSpec::uniform(1), Eigen::VectorXd::Ones(1)));
}

TEST_CASE("empirical characteristic functions match on 20 frequencies") {
  const std::size_t n = 40000;
  for (const auto& spec : {MeasureSpec::gaussian((Eigen::MatrixXd(2, 2) << 2, 0.5, 0.5, 1).finished()),
                           MeasureSpec::stable(1.5, SpectralMeasure::circle(64, 0.5)),
                           MeasureSpec::stable_rot_inv(1.7, 2)}) {
    const auto b = sample(spec, n, 5);
    for (const auto& xi : fixed_frequencies(2, 20))
      CHECK(std::abs(empirical_cf(b.data, xi) - characteristic_function(spec, xi)) <= 4.0 / std::sqrt(double(n)));
  }
}

TEST_CASE("sampling is reproducible") {
  for (const auto& spec : {MeasureSpec::gaussian(Eigen::MatrixXd::Identity(2, 2)),
                           MeasureSpec::stable(1.4, SpectralMeasure::axes(2, 0.3)), MeasureSpec::exp_power(0.5, 2),
                           MeasureSpec::gamma(2.0), MeasureSpec::beta_dist(2.0, 3.0), log_concave_quartic(2, 0.5)}) {
    const auto a = sample(spec, 500, 9, 3), b = sample(spec, 500, 9, 3), c = sample(spec, 500, 9, 4);
    CHECK(a.data == b.data);
    CHECK(a.data != c.data);
  }
}

TEST_CASE("interpolation coupling") {
  const auto gauss = MeasureSpec::gaussian(Eigen::MatrixXd::Identity(2, 2));
  const std::size_t n = 40000;
  {
    const auto [x, y] = sample_interpolation_pair(gauss, 0.0, n, 1);
    const Eigen::MatrixXd cross = x.data.transpose() * y.data / double(n);
    CHECK(cross.cwiseAbs().maxCoeff() <= 3.0 / std::sqrt(double(n)) * 1.5);
  }
  {
    const auto [x, y] = sample_interpolation_pair(gauss, 1.0, 1000, 1);
    CHECK(x.data == y.data);
  }
  {
    const auto [x, y] = sample_interpolation_pair(gauss, 0.5, n, 2);
    const Eigen::MatrixXd cross = x.data.transpose() * y.data / double(n);
    // Var(X_i Y_i) = 1 + z^2, Var(X_1 Y_2) = 1
    CHECK(std::abs(cross(0, 0) - 0.5) <= 3.0 * std::sqrt(1.25 / n));
    CHECK(std::abs(cross(1, 1) - 0.5) <= 3.0 * std::sqrt(1.25 / n));
    CHECK(std::abs(cross(0, 1)) <= 3.0 * std::sqrt(1.0 / n));
  }
  CHECK_THROWS(sample_interpolation_pair(gauss, 1.5, 10, 1));
  CHECK_THROWS(sample_interpolation_pair(MeasureSpec::uniform(1), 0.5, 10, 1));
}

TEST_CASE("interpolation coupling has the product characteristic function") {
  const std::size_t n = 20000;
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (const auto& spec : {MeasureSpec::gaussian(Eigen::MatrixXd::Identity(1, 1)),
                           MeasureSpec::stable(1.5, SpectralMeasure::standard_1d())}) {
    for (double z : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const auto [x, y] = sample_interpolation_pair(spec, z, n, 31);
      Eigen::MatrixXd joint(n, 2);
      joint << x.data, y.data;
      for (int k = 0; k < 10; ++k) {
        const double a = u(gen), b = u(gen);
        const auto phi = [&](double s) { return characteristic_function(spec, Eigen::VectorXd::Constant(1, s)).real(); };
        const double expect = std::pow(phi(a) * phi(b), 1.0 - z) * std::pow(phi(a + b), z);
        CHECK(std::abs(empirical_cf(joint, Eigen::Vector2d(a, b)) - expect) <= 4.0 / std::sqrt(double(n)));
        CHECK(std::abs(empirical_cf(x.data, Eigen::VectorXd::Constant(1, a)) - phi(a)) <= 4.0 / std::sqrt(double(n)));
        CHECK(std::abs(empirical_cf(y.data, Eigen::VectorXd::Constant(1, b)) - phi(b)) <= 4.0 / std::sqrt(double(n)));
      }
    }
  }
}

TEST_CASE("nondegeneracy functional") {
  // brute force over 10^4 directions
  auto brute = [](const SpectralMeasure& s, double alpha) {
    double best = INFINITY;
    for (int i = 0; i < 10000; ++i) {
      const double th = 2.0 * std::numbers::pi * i / 10000.0;
      const Eigen::Vector2d y(std::cos(th), std::sin(th));
      double v = 0.0;
      for (const auto& a : s.atoms) v += a.weight * std::pow(std::abs(y.dot(a.direction)), alpha);
      best = std::min(best, v);
    }
    return best;
  };
  const auto ax = SpectralMeasure::axes(2, 0.3);
  CHECK(check_nondegenerate(ax, 1.5) == doctest::Approx(brute(ax, 1.5)).epsilon(1e-9));
  CHECK(check_nondegenerate(ax, 1.5) == doctest::Approx(0.6).epsilon(1e-9));
  SpectralMeasure single;
  single.atoms = {{Eigen::Vector2d(1, 0), 0.5}, {Eigen::Vector2d(-1, 0), 0.5}};
  CHECK(check_nondegenerate(single, 1.5) <= 1e-12);
  const auto circ = SpectralMeasure::circle(64, 1.0);
  CHECK(check_nondegenerate(circ, 1.5) > 0.0);
  CHECK(check_nondegenerate(circ, 1.5) == doctest::Approx(brute(circ, 1.5)).epsilon(1e-6));
}

TEST_CASE("spectral measures are symmetric") {
  for (const auto& s : {SpectralMeasure::axes(3, 0.2), SpectralMeasure::circle(64, 1.0), SpectralMeasure::standard_1d()})
    for (const auto& a : s.atoms) {
      bool found = false;
      for (const auto& b : s.atoms) found = found || ((a.direction + b.direction).norm() < 1e-12 && a.weight == b.weight);
      CHECK(found);
    }
  SpectralMeasure lopsided;
  lopsided.atoms = {{Eigen::VectorXd::Ones(1), 0.5}, {-Eigen::VectorXd::Ones(1), 0.25}};
  CHECK_THROWS(lopsided.validate());
}

TEST_CASE("validation rejects the open-interval endpoints") {
  CHECK_THROWS(MeasureSpec::stable(2.0, SpectralMeasure::standard_1d()));
  CHECK_THROWS(MeasureSpec::stable(1.0, SpectralMeasure::standard_1d()));
  CHECK_THROWS(MeasureSpec::exp_power(1.0, 1));
  CHECK_THROWS(MeasureSpec::gaussian((Eigen::MatrixXd(2, 2) << 1, 2, 2, 1).finished()));
  CHECK_THROWS(MeasureSpec::beta_dist(1.5, 3.0));
  CHECK_THROWS(measure_kind_from_string("cauchy"));
}

TEST_CASE("analytic moments of the bounded kinds") {
  for (const auto& spec : {MeasureSpec::uniform(2), MeasureSpec::centered_exponential(2), MeasureSpec::gamma(2.5),
                           MeasureSpec::beta_dist(2.0, 3.0), MeasureSpec::exp_power(0.5, 1), log_concave_quartic(2, 0.5)}) {
    const std::size_t n = 200000;
    const auto b = sample(spec, n, 41);
    const Eigen::RowVectorXd m = b.data.colwise().mean();
    const Eigen::MatrixXd centered = b.data.rowwise() - m;
    const Eigen::MatrixXd cov = centered.transpose() * centered / double(n - 1);
    const Eigen::MatrixXd ref = spec.covariance();
    for (Eigen::Index i = 0; i < spec.d; ++i) {
      CHECK(std::abs(m(i) - spec.mean()(i)) <= 4.0 * std::sqrt(ref(i, i) / n));
      CHECK(std::abs(cov(i, i) - ref(i, i)) <= 0.03 * ref(i, i));
    }
  }
}

#include "oracles.hpp"
#include "steinlab/semigroups.hpp"
#include "steinlab/special.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace steinlab;

namespace {

const MeasureSpec& stable15() {
  static const MeasureSpec s = MeasureSpec::stable(1.5, SpectralMeasure::standard_1d());
  return s;
}

Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }

Eigen::VectorXd on_grid(const TestFunction& f, const DensityGrid1D& g) {
  Eigen::VectorXd v(g.size());
  for (Eigen::Index j = 0; j < g.size(); ++j) v(j) = f.at(g.x(j));
  return v;
}

double grid_mean(const Eigen::VectorXd& f, const DensityGrid1D& g) { return f.cwiseProduct(g.p).sum() * g.dx; }

}  // namespace

TEST_CASE("Gaussian Mehler semigroup") {
  const auto f = TestFunction::hermite({2});
  SemigroupQuery q{MeasureSpec::gaussian(Eigen::MatrixXd::Identity(1, 1)), 0.0, v1(0.7), 20000, 1};
  CHECK(mehler_gaussian(f, q).value == f.at(0.7));
  q.t = 40.0;
  const auto far = mehler_gaussian(f, q);
  CHECK(std::abs(far.value) <= 3.0 * far.std_error);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0), ut(0.05, 2.0);
  for (int i = 0; i < 30; ++i) {
    const Eigen::Vector2d xi(u(gen), u(gen)), x(u(gen), u(gen));
    SemigroupQuery qc{MeasureSpec::gaussian(Eigen::MatrixXd::Identity(2, 2)), ut(gen), x, 20000, 3, std::uint64_t(i)};
    const auto r = mehler_gaussian(TestFunction::character(xi), qc);
    // cos(<xi, x> e^{-t}) exp(-(1 - e^{-2t}) |xi|^2 / 2)
    const double ref = std::cos(xi.dot(x) * std::exp(-qc.t)) * std::exp(-0.5 * (1 - std::exp(-2 * qc.t)) * xi.squaredNorm());
    REQUIRE(r.closed_form.has_value());
    CHECK(*r.closed_form == doctest::Approx(ref).epsilon(1e-12));
    CHECK(std::abs(r.value - ref) <= 4.0 * r.std_error);
  }
}

TEST_CASE("stable Mehler semigroup") {
  const auto bump = TestFunction::bump_1d(0.2, 1.5);
  SemigroupQuery q{stable15(), 0.0, v1(0.4), 1000, 1};
  CHECK(mehler_stable(bump, q).value == bump.at(0.4));
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0), ut(0.05, 2.0);
  for (int i = 0; i < 30; ++i) {
    const double xi = u(gen), x = u(gen), t = ut(gen);
    SemigroupQuery qc{stable15(), t, v1(x), 20000, 5, std::uint64_t(i)};
    const auto r = mehler_stable(TestFunction::character(v1(xi), -std::numbers::pi / 2), qc);
    const double c = std::pow(1 - std::exp(-1.5 * t), 1 / 1.5);
    const double ref = std::sin(xi * x * std::exp(-t)) * std::exp(-0.5 * std::pow(std::abs(c * xi), 1.5));
    CHECK(*r.closed_form == doctest::Approx(ref).epsilon(1e-12));
    CHECK(std::abs(r.value - ref) <= 4.0 * r.std_error);
  }
}

TEST_CASE("stable semigroup preserves the invariant mean and contracts") {
  const auto grid = shared_stable_density(1.5);
  const auto& g = *grid;
  const Eigen::VectorXd f = on_grid(TestFunction::bump_1d(0.3, 2.0), g);
  const double mean = grid_mean(f, g);
  double prev = INFINITY;
  for (double t : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    const Eigen::VectorXd pf = stable_semigroup_grid_1d(f, t, g);
    CHECK(std::abs(grid_mean(pf, g) - mean) <= 1e-6);
    const double l2 = std::sqrt(grid_mean((pf.array() - mean).square().matrix(), g));
    CHECK(l2 < prev);
    prev = l2;
  }
}

TEST_CASE("fractional gradient") {
  const double alpha = 1.5;
  const auto spectral = SpectralMeasure::standard_1d();
  CHECK(frac_gradient(TestFunction::constant(1, 2.0), v1(0.3), spectral, alpha).norm() == 0.0);
  // cos(xi x + ph) -> -(alpha / 2) |xi|^{alpha - 1} sgn(xi) sin(xi x + ph)
  for (double xi : {-1.7, -0.4, 0.6, 2.0})
    for (double x : {-1.0, 0.0, 0.8}) {
      const double ph = 0.3;
      const double ref = -(alpha / 2) * std::pow(std::abs(xi), alpha - 1) * (xi > 0 ? 1 : -1) * std::sin(xi * x + ph);
      CHECK(std::abs(frac_gradient(TestFunction::character(v1(xi), ph), v1(x), spectral, alpha)(0) - ref) <= 1e-6);
    }
  const auto even = TestFunction::bump_1d(0.0, 1.5);
  for (double x : {0.2, 0.7, 1.1})
    CHECK(frac_gradient(even, v1(-x), spectral, alpha)(0) ==
          doctest::Approx(-frac_gradient(even, v1(x), spectral, alpha)(0)).epsilon(1e-8));
}

TEST_CASE("Bismut formula on characters") {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(-2.0, 2.0), ut(0.1, 2.0);
  for (double alpha : {1.2, 1.5, 1.8}) {
    const auto spec1 = MeasureSpec::stable(alpha, SpectralMeasure::standard_1d());
    const auto spec2 = MeasureSpec::stable(alpha, SpectralMeasure::axes(2, 0.25));
    for (int i = 0; i < 10; ++i) {
      const double t = ut(gen);
      CHECK(bismut_stable_check(TestFunction::character(v1(u(gen))), t, v1(u(gen)), spec1, 0, 1).gap <= 1e-6);
      const Eigen::Vector2d xi(u(gen), u(gen)), x(u(gen), u(gen));
      CHECK(bismut_stable_check(TestFunction::character(xi, 0.4), t, x, spec2, 0, 1).gap <= 1e-6);
      CHECK(bismut_stable_check(TestFunction::character(xi, 0.4), t, x, spec2, 0, 1, BismutLhs::Multiplier).gap <= 1e-6);
    }
  }
  const auto c = bismut_stable_check(TestFunction::constant(1, 3.0), 0.5, v1(0.2), stable15(), 1000, 1);
  CHECK(c.lhs.norm() == 0.0);
  CHECK(c.rhs.norm() <= 1e-12);
}

TEST_CASE("Bismut formula on a bump") {
  const auto b = bismut_stable_check(TestFunction::bump_1d(0.0, 1.5), 0.7, v1(0.3), stable15(), 200000, 7);
  CHECK(b.std_error > 0.0);
  CHECK(b.gap <= 4.0 * b.std_error);
}

TEST_CASE("gradient Bismut formula") {
  const auto grid = shared_stable_density(1.5);
  const auto k = gradient_bismut_stable(TestFunction::constant(1, 1.0), 0.5, 0.3, *grid, 100000, 1);
  CHECK(std::abs(k.value) <= 3.0 * k.std_error);
  // d/dx cos(xi x e^{-t}) phi(c xi) = -xi e^{-t} sin(xi x e^{-t}) phi(c xi)
  const double xi = 1.3, t = 0.5, x = 0.4;
  const double c = std::pow(1 - std::exp(-1.5 * t), 1 / 1.5);
  const double ref = -xi * std::exp(-t) * std::sin(xi * x * std::exp(-t)) * std::exp(-0.5 * std::pow(c * xi, 1.5));
  const auto r = gradient_bismut_stable(TestFunction::character(v1(xi)), t, x, *grid, 200000, 2);
  CHECK(std::abs(r.value - ref) <= 4.0 * r.std_error);
  const auto even = TestFunction::bump_1d(0.0, 1.5);
  const auto a = gradient_bismut_stable(even, t, 0.6, *grid, 100000, 3);
  const auto m = gradient_bismut_stable(even, t, -0.6, *grid, 100000, 3);
  CHECK(std::abs(a.value + m.value) <= 3.0 * std::hypot(a.std_error, m.std_error));
}

TEST_CASE("Gaussian Hessian by the Bismut formula") {
  const Eigen::Matrix2d sigma = (Eigen::Matrix2d() << 2.0, 0.3, 0.3, 0.5).finished();
  const double inv_sqrt_op = 1.0 / std::sqrt(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(sigma).eigenvalues()(0));
  const auto lin = TestFunction::coordinate(2, 0);
  const auto hl = gaussian_hessian_bismut(lin, Eigen::Vector2d(0.3, -0.2), sigma, 4000, 1);
  CHECK(hl.value.norm() <= std::sqrt(2 / std::numbers::pi) * inv_sqrt_op + 4.0 * hl.std_error.maxCoeff());

  // Hess f_h = xi xi^T int_0^1 s cos(s <xi, x>) exp(-(1 - s^2)|xi|^2 / 2) ds for h = cos <xi, .>
  const Eigen::Vector2d xi(0.8, -0.5), x(0.4, 1.1);
  const double scalar = oracle::simpson(
      [&](double s) { return s * std::cos(s * xi.dot(x)) * std::exp(-0.5 * (1 - s * s) * xi.squaredNorm()); }, 0.0, 1.0,
      2000);
  const Eigen::Matrix2d ref = scalar * xi * xi.transpose();
  const auto h = gaussian_hessian_bismut(TestFunction::character(xi), x, Eigen::Matrix2d::Identity(), 20000, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(h.value(i, j) - ref(i, j)) <= 4.0 * h.std_error(i, j));
  for (const auto& f : scalar_dictionary(2)) {
    const auto e = gaussian_hessian_bismut(f, Eigen::Vector2d(0.5, -0.3), sigma, 2000, 3);
    CHECK(e.value.norm() <= inv_sqrt_op + 4.0 * e.hs_std_error);
  }
}

TEST_CASE("gamma transform") {
  const auto gauss = MeasureSpec::gaussian(Eigen::MatrixXd::Identity(1, 1));
  for (int k : {1, 2, 3}) {
    const auto r = gamma_transform(gauss, 2.0, 0.0, TestFunction::hermite({k}), v1(0.7));
    CHECK_FALSE(r.diverged);
    CHECK(r.value == doctest::Approx(hermite(k, 0.7) / k).epsilon(1e-8));
  }
  CHECK(gamma_transform(gauss, 3.0, 1.0, TestFunction::constant(1, 2.5), v1(0.1)).value == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(gamma_transform(gauss, 1.0, 1.0, TestFunction::hermite({1}), v1(0.9)).value ==
        doctest::Approx(0.9 / std::sqrt(2.0)).epsilon(1e-8));
  CHECK(gamma_transform(gauss, 2.0, 0.0, TestFunction::constant(1, 1.0), v1(0.0)).diverged);
}

TEST_CASE("T_t family and the dual semigroup") {
  const auto grid = shared_stable_density(1.5);
  const auto& g = *grid;
  for (double t : {0.3, 1.0}) {
    CHECK((t_family_1d(g.p, t, g) - g.p).cwiseAbs().maxCoeff() <= 1e-6);
    const Eigen::VectorXd one = t_family_1d(Eigen::VectorXd::Ones(g.size()), t, g);
    CHECK(std::abs(one(g.size() / 2) / std::exp(t) - 1.0) <= 1e-3);
  }
  const Eigen::VectorXd h = on_grid(TestFunction::bump_1d(-0.3, 1.5), g);
  const Eigen::VectorXd hp = h.cwiseProduct(g.p);
  CHECK((t_family_1d(t_family_1d(hp, 0.3, g), 0.3, g) - t_family_1d(hp, 0.6, g)).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(t_family_1d(h, 0.5, g).minCoeff() >= -1e-8);
  CHECK(t_family_1d(h, 0.0, g) == h);
  CHECK(dual_semigroup_1d(h, 0.0, g) == h);
  const Eigen::VectorXd dual_one = dual_semigroup_1d(Eigen::VectorXd::Ones(g.size()), 0.7, g);
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (std::abs(g.x(i)) <= 20.0) CHECK(std::abs(dual_one(i) - 1.0) <= 1e-5);
  // the grid stops at the heavy tail, which holds ~1e-4 of the mass
  const double moved = grid_mean(dual_semigroup_1d(h, 0.7, g), g) - grid_mean(h, g);
  CHECK(std::abs(moved) <= 1e-4);
  const Eigen::VectorXd f = on_grid(TestFunction::bump_1d(0.5, 2.0), g);
  for (double t : {0.3, 1.0}) {
    const double lhs = grid_mean(dual_semigroup_1d(h, t, g).cwiseProduct(f), g);
    const double rhs = grid_mean(h.cwiseProduct(stable_semigroup_grid_1d(f, t, g)), g);
    CHECK(std::abs(lhs - rhs) <= 1e-5);
  }
}

#include "steinlab/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace steinlab {

QuadratureResult adaptive_quad(const std::function<double(double)>& f, double a, double b, double tol,
                               std::size_t max_subdivisions) {
  if (!(tol > 0.0)) throw std::invalid_argument("adaptive_quad: tol must be positive");
  QuadOptions opt;
  opt.abs_tol = tol;
  opt.max_subdivisions = max_subdivisions;
  return integrate<double>(f, a, b, opt);
}

namespace {

GaussRule compute_legendre(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes(i) = -x;
    r.nodes(n - 1 - i) = x;
    r.weights(i) = w;
    r.weights(n - 1 - i) = w;
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(compute_legendre(n));
  return *slot;
}

GaussRule gauss_legendre(int n, double a, double b) {
  const GaussRule& ref = gauss_legendre(n);
  GaussRule r;
  r.nodes = (0.5 * (b - a)) * ref.nodes.array() + 0.5 * (a + b);
  r.weights = 0.5 * (b - a) * ref.weights;
  return r;
}

GaussRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: order must be positive");
  // Jacobi matrix of the monic probabilists' Hermite recurrence
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussRule r;
  r.nodes = es.eigenvalues();
  r.weights = es.eigenvectors().row(0).array().square().transpose();
  return r;
}

}  // namespace steinlab

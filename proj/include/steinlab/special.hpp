#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace steinlab {

// Gamma(a, x) = int_x^inf t^{a-1} e^{-t} dt. Series below x = a + 1, Lentz
// continued fraction above.
double upper_incomplete_gamma(double a, double x);
// e^x Gamma(a, x), finite where Gamma(a, x) itself underflows.
double upper_incomplete_gamma_scaled(double a, double x);
// Regularized Q(a, x) = Gamma(a, x) / Gamma(a) and P = 1 - Q.
double gamma_q(double a, double x);
double gamma_p(double a, double x);
// x such that Q(a, x) = q, q in (0, 1).
double gamma_q_inverse(double a, double q);

// Standard normal quantile: rational start plus Newton on erfc.
double normal_quantile(double u);
double normal_cdf(double x);

// q_alpha(t) and its integral over (0, inf).
double q_alpha(double alpha, double t);
double q_alpha_integral(double alpha, double tol = 1e-10);

// Probabilists' Hermite polynomials.
template <typename Scalar>
Scalar hermite(int n, const Scalar& x) {
  if (n < 0) return Scalar(0);
  if (n == 0) return Scalar(1);
  Scalar h0(1), h1 = x;
  for (int k = 1; k < n; ++k) {
    Scalar h2 = x * h1 - Scalar(k) * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

// H_n' = n H_{n-1}
template <typename Scalar>
Scalar hermite_derivative(int n, const Scalar& x, int order = 1) {
  Scalar c(1);
  for (int j = 0; j < order; ++j) {
    if (n - j <= 0) return Scalar(0);
    c *= Scalar(n - j);
  }
  return c * hermite(n - order, x);
}

inline constexpr int kMaxHermiteDegree = 10;

struct HermiteEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  // (-L) H_k = |k| H_k for the Ornstein-Uhlenbeck generator L = Delta - x.grad
  int eigenvalue = 0;
};

HermiteEval hermite_eval(const std::vector<int>& k, const Eigen::VectorXd& x);

// E|Z|^p for Z ~ N(0,1), by quadrature against the Gaussian density.
double gaussian_abs_moment(double p);

// Symmetric alpha-stable constants for the convention exp(-|xi|^alpha / 2).
// Levy density c_alpha / |u|^{1+alpha} in one dimension.
double stable_levy_constant(double alpha);
// lambda = K_alpha * sigma between the characteristic-function weights and
// the polar Levy weights.
double stable_lambda_per_sigma(double alpha);

}  // namespace steinlab

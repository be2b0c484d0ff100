#pragma once

#include "steinlab/measures.hpp"
#include "steinlab/test_functions.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace steinlab {

// margin = rhs - lhs. Inequality form passes when lhs <= rhs + 4 std_error;
// equality form when |margin| <= 4 std_error.
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double std_error = 0.0;  // of the margin
  bool equality = false;
  bool pass = false;
};

bool report_passes(const InequalityReport& r);
InequalityReport make_report(std::string name, double lhs, double rhs, double std_error, bool equality = false);

struct PoincareEstimate {
  double lower_bound = 0.0;  // largest Rayleigh quotient over the dictionary
  double std_error = 0.0;    // of the maximizing quotient
  std::string argmax;
  std::vector<double> quotients;  // in dictionary order
  std::optional<double> analytic_upper;
};

inline constexpr int kCovZNodes = 16;

// Cov(f(X), g(X)) under N(0, Sigma) against
// int_0^1 E <Sigma grad f(X_z), grad g(Y_z)> dz, Gauss-Legendre in z. The two
// sides use independent samples; mc_budget draws for the left side and per z node.
InequalityReport verify_cov_representation_gaussian(const TestFunction& f, const TestFunction& g,
                                                    const Eigen::MatrixXd& sigma, int z_nodes,
                                                    std::size_t mc_budget, std::uint64_t seed);

// 1D, CF exp(-|xi|^alpha / 2): the jump term
// int_0^1 E int Delta_u f(X_z) Delta_u g(Y_z) nu_alpha(du) dz, with the inner
// u-integral by adaptive quadrature on every sampled pair.
InequalityReport verify_cov_representation_stable_1d(const TestFunction& f, const TestFunction& g, double alpha,
                                                     int z_nodes, std::size_t mc_budget, double quad_tol,
                                                     std::uint64_t seed);

// levy_scale * int (f(x + u) - f(x)) (g(y + u) - g(y)) nu_alpha(du), nu_alpha the Levy
// measure of exp(-|xi|^alpha / 2). SmoothBump supports are used as breakpoints and give exact tails.
double stable_jump_pairing_1d(const TestFunction& f, double x, const TestFunction& g, double y, double alpha,
                              double quad_tol, double levy_scale = 1.0);

// ||f - E f||_p <= sqrt(p - 1) ||Sigma^{1/2} grad f||_p under N(0, Sigma), p >= 2.
InequalityReport lp_poincare_gaussian(const TestFunction& f, double p, const Eigen::MatrixXd& sigma,
                                      std::size_t mc_budget, std::uint64_t seed);

// ||f - E f||_p <= (pi / 2) ||Z||_p ||grad f||_p under N(0, I), p > 1.
InequalityReport pisier_check(const TestFunction& f, double p, std::size_t mc_budget, std::uint64_t seed);

struct RobustMean {
  double value = 0.0;
  double std_error = 0.0;
};
// median of `groups` block means; the error is 1.2533 * 1.4826 * MAD / sqrt(groups)
RobustMean median_of_means(const Eigen::VectorXd& x, int groups = 32);

// ||f - E f||_p <= (int q_alpha) ||X||_{p1} ||grad f||_{p2} under a stable law,
// 1/p = 1/p1 + 1/p2, 1 < p1 < alpha. E||X||^{p1} by median of means.
InequalityReport stable_lp_poincare(const TestFunction& f, double p, double p1, double alpha, const MeasureSpec& spec,
                                    std::size_t mc_budget, std::uint64_t seed);

struct HermiteTerm {
  double coef = 0.0;
  std::vector<int> k;
};
using HermiteCombination = std::vector<HermiteTerm>;

// int_0^inf e^{-(lambda + 1) t} / sqrt(1 - e^{-2t}) dt by adaptive quadrature
double sobolev_time_integral(double lambda, double tol = 1e-12);
// gamma_2(q) * sobolev_time_integral(lambda), q = p / (p - 1), gamma_2(q) = ||Z||_q in one dimension
double sobolev_constant(double lambda, double p);

// ||f||_p <= sqrt(p - 1) C(lambda, p) (lambda ||f||_p + ||(-L) f||_p) under N(0, I)
// for a combination of Hermite products without constant term. lambda = 0 is allowed.
InequalityReport sobolev_type_check(const HermiteCombination& f, double p, double lambda, std::size_t mc_budget,
                                    std::uint64_t seed);

enum class CovFamily { Gaussian, Laguerre, Jacobi, LogConcave, StableNonlocal };
std::string to_string(CovFamily family);
CovFamily cov_family_from_string(const std::string& name);

// |Cov(f, g)| <= C ||D f||_p ||D g||_q, q = p / (p - 1), with
//   Gaussian:       D = Sigma^{1/2} grad, C = 1
//   Laguerre:       D f = sqrt(x) f' under Gamma(shape, 1), C = 2
//   Jacobi:         D f = sqrt(1 - x^2) f' under the Beta law on [-1, 1], C = 1 / jacobi_kappa
//   LogConcave:     D = grad, C = 1 / k with Hess V >= k I, k = kappa / lambda_max(Sigma)
//   StableNonlocal: D = grad_nu (1D), C = 1
// jacobi_kappa is required for the Jacobi family.
InequalityReport asymmetric_cov_suite(CovFamily family, const MeasureSpec& spec, const TestFunction& f,
                                      const TestFunction& g, double p, std::size_t mc_budget, std::uint64_t seed,
                                      std::optional<double> jacobi_kappa = std::nullopt, double quad_tol = 1e-8);

// (levy_scale * int |f(x + u) - f(x)|^2 nu_alpha(du))^{1/2}
double stable_gradient_length_1d(const TestFunction& f, double x, double alpha, double quad_tol,
                                 double levy_scale = 1.0);

// sup over the dictionary of sum_i Var f_i / E tr(J Sigma J^T), common samples.
// analytic_upper: 1 for the Gaussian with the same Sigma, 1/kappa for LogConcave.
PoincareEstimate poincare_rayleigh(const MeasureSpec& spec, const Eigen::MatrixXd& sigma,
                                   const std::vector<VectorTestFunction>& dictionary, std::size_t mc_budget,
                                   std::uint64_t seed);

// Under the standard exponential law mu and nu(du) = e^{-u} du / u on (0, inf):
// lhs = int int |f(x + u) - f(x)|^2 nu(du) mu(dx), rhs = int w f'(w)^2 mu(dw).
// std_error carries the quadrature error estimates.
InequalityReport exp_weighted_vs_nonlocal(const TestFunction& f, double quad_tol = 1e-11);

}  // namespace steinlab

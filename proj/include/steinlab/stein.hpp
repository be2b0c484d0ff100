#pragma once

#include "steinlab/measures.hpp"
#include "steinlab/test_functions.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace steinlab {

// x -> tau(x) with E<tau(X); J_f(X)>_HS = E<X - m; f(X)>, m the mean of the target.
struct SteinKernelField {
  std::string name;
  int d = 1;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> evaluator;
  Eigen::MatrixXd target_sigma;
  Eigen::VectorXd mean;
  std::string support = "R^d";
  bool diagonal = false;

  Eigen::MatrixXd operator()(const Eigen::VectorXd& x) const { return evaluator(x); }
};

struct DiscrepancyReport {
  double discrepancy = 0.0;  // E ||tau(X) - Sigma||_HS^2
  double std_error = 0.0;
  double w1_bound = 0.0;     // ||Sigma^{-1/2}||_op sqrt(discrepancy)
  std::size_t budget = 0;
  std::uint64_t seed = 0;
};

// tau(x) = (1/p(x)) int_x^hi y p(y) dy on the support (lo, hi). With log_scale the
// callable returns log p. The density need not be normalized but must be centered.
SteinKernelField kernel_1d_from_density(std::function<double(double)> density, double lo, double hi,
                                        bool log_scale = false);

// Closed forms: Gaussian (1D), CenteredExponential x + 1, Uniform (3 - x^2)/2,
// ExpPower (1/delta) e^{|x|^delta} Gamma(2/delta, |x|^delta), Gamma x,
// Beta (1 - x^2)/(a + b). Multivariate product kinds go through product_kernel.
SteinKernelField kernel_1d(const MeasureSpec& spec);

// Coordinates of a product measure: kernel_1d of each marginal, or the numeric
// 1D kernel of a separable log-concave potential.
SteinKernelField product_kernel(const std::vector<MeasureSpec>& specs);
// Product kernel of a d-dimensional product-type spec (CenteredExponential,
// Uniform, non-radial ExpPower, the quartic log-concave family, Gaussian with
// diagonal Sigma).
SteinKernelField product_kernel(const MeasureSpec& spec);

// tau_{delta,k}(x) = (1 / (2 phi(|x|^2))) int_{|x|^2}^inf phi(t) dt, phi(t) = exp(-t^{delta/2}),
// the same for every k; the field is tau I_d.
double tau_radial(double delta, double norm);
SteinKernelField tau_radial_multid(double delta, int d);

// Monte Carlo of E ||tau(X) - Sigma||_HS^2. The delete-one jackknife error of
// a sample mean is the classical standard error, which is what is reported.
DiscrepancyReport stein_discrepancy(const SteinKernelField& field, const MeasureSpec& spec, std::size_t mc_budget,
                                    std::uint64_t seed);

struct SumBound {
  double discrepancy = 0.0;
  double w1_bound = 0.0;
};
// E ||tau_n(S_n) - Sigma||^2 <= disc / n
SumBound sum_discrepancy_bound(const DiscrepancyReport& marginal, int n);

struct KernelIdentityCheck {
  double lhs = 0.0;  // E <tau(X); J_f(X)>_HS
  double rhs = 0.0;  // E <X - m; f(X)>
  double std_error = 0.0;  // of lhs - rhs, paired samples
};
KernelIdentityCheck kernel_identity_check(const SteinKernelField& field, const MeasureSpec& spec,
                                          const VectorTestFunction& f, std::size_t mc_budget, std::uint64_t seed,
                                          std::uint64_t substream = 0);

// int_lo^hi h(x) p_delta(x) dx for p_delta = C exp(-|x|^delta), through x = +-u^{1/delta};
// tol is used as both absolute and relative tolerance.
double mu_delta_integral(const std::function<double(double)>& h, double delta,
                         double lo = -std::numeric_limits<double>::infinity(),
                         double hi = std::numeric_limits<double>::infinity(), double tol = 1e-12);

// Weak solution of -f' + delta |x|^{delta-1} sgn(x) f = g under mu_delta.
class FDelta {
 public:
  FDelta(std::function<double(double)> g, double delta, double p);
  double operator()(double x) const { return x >= 0.0 ? right(x) : left(x); }
  // (1/p(x)) int_x^inf g p
  double right(double x) const;
  // -(1/p(x)) int_{-inf}^x g p
  double left(double x) const;
  // ||f||_{L^r(mu_delta)}; r must satisfy r/(r-1) > p/(p-1)
  double lr_norm(double r) const;
  double delta() const { return delta_; }
  double p() const { return p_; }
  double g_mean() const { return g_mean_; }

 private:
  std::function<double(double)> g_;
  double delta_;
  double p_;
  double g_mean_;
};

// Centered primitive of f_delta, weak solution of (-L_delta) F = g. The running
// integral of f_delta is tabulated on panels in u = |x|^delta (geometric near 0,
// uniform up to u = 80), with 16-point Gauss-Legendre inside each panel; partial
// panels integrate the degree-15 Legendre interpolant of the same node values.
class FPrimitive {
 public:
  FPrimitive(std::function<double(double)> g, double delta, double p);
  double operator()(double x) const;
  double at_zero() const { return f0_; }
  // int F p_delta, zero up to quadrature error
  double centering() const;
  double lr_norm(double r) const;
  const FDelta& f() const { return f_; }

 private:
  double running(double sign, double u) const;  // int_0^{u^{1/delta}} f(sign y) dy

  FDelta f_;
  double f0_;
  std::vector<double> edges_;
  std::vector<double> cum_pos_, cum_neg_;
  // Legendre coefficients of the integrand on each panel, 16 per panel
  std::vector<double> leg_pos_, leg_neg_;
};

FDelta f_delta(std::function<double(double)> g, double delta, double p);
FPrimitive F_delta(std::function<double(double)> g, double delta, double p);

// throws when r/(r-1) <= p/(p-1)
void check_lr_exponent(double r, double p);

struct SteinSolution {
  double value = 0.0;
  double value_std_error = 0.0;
  Eigen::VectorXd gradient;
  Eigen::VectorXd gradient_std_error;
  Eigen::MatrixXd gradient_cov;  // covariance of the gradient estimate
  // bound on the neglected time integral beyond T_max = 40
  double tail_bound = 0.0;
};

inline constexpr double kSteinTmax = 40.0;

// f_h = -int_0^inf (P_t h(x) - E h) dt and grad f_h = -int_0^inf e^{-t} P_t(grad h)(x) dt
// for the Ornstein-Uhlenbeck semigroup with invariant law N(0, Sigma). With
// cos th = e^{-t}: f_h = -int_0^{pi/2} E[h(x cos th + sin th Y) - h(Y)] tan th dth.
// 64 Gauss-Legendre nodes, antithetic Monte Carlo in Y. Throws when the tail
// bound exceeds 1e-8.
SteinSolution solve_stein_equation(const TestFunction& h, const Eigen::VectorXd& x, const Eigen::MatrixXd& sigma,
                                   std::size_t mc_budget, std::uint64_t seed, std::uint64_t substream = 0);

struct SteinFactorRow {
  std::string name;
  double max_hs = 0.0;      // max over points of ||Hess f_h||_HS
  double hs_std_error = 0.0;  // at the maximizing point
  double hs_bound = 0.0;    // ||Sigma^{-1/2}||_op
  double max_op = 0.0;
  double op_std_error = 0.0;
  double op_bound = 0.0;    // 1/2 when ||Hess h||_op <= 1 is certified, else +inf
  double max_grad = 0.0;
  double grad_std_error = 0.0;
  bool pass = false;        // all three bounds within 4 standard errors
};

// Hessian and gradient of f_h at each row of `points` for every h in the dictionary.
std::vector<SteinFactorRow> stein_factor_suite(const std::vector<TestFunction>& dictionary,
                                               const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& points,
                                               std::size_t mc_budget, std::uint64_t seed);

struct ScalarEstimate {
  double value = 0.0;
  double std_error = 0.0;
};
// E ||A Y||, Y ~ N(0, I)
ScalarEstimate expected_gaussian_norm(const Eigen::MatrixXd& a, std::size_t mc_budget, std::uint64_t seed);

}  // namespace steinlab

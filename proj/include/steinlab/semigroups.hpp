#pragma once

#include "steinlab/measures.hpp"
#include "steinlab/stable_density.hpp"
#include "steinlab/test_functions.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>

namespace steinlab {

struct SemigroupQuery {
  MeasureSpec spec;
  double t = 0.0;
  Eigen::VectorXd x;
  std::size_t mc_budget = 10000;
  std::uint64_t seed = 0;
  std::uint64_t substream = 0;
};

struct SemigroupValue {
  double value = 0.0;      // Monte Carlo estimate
  double std_error = 0.0;
  std::optional<double> closed_form;  // characters, and Hermite products under N(0, I)
};

// P_t f(x) = E f(x e^{-t} + sqrt(1 - e^{-2t}) Y), Y ~ N(0, Sigma)
SemigroupValue mehler_gaussian(const TestFunction& f, const SemigroupQuery& q);
// P_t f(x) = E f(x e^{-t} + (1 - e^{-alpha t})^{1/alpha} Y), Y ~ mu_alpha
SemigroupValue mehler_stable(const TestFunction& f, const SemigroupQuery& q);

// Closed forms; nullopt when the function/kind pair has none.
std::optional<double> semigroup_closed_form(const TestFunction& f, const MeasureSpec& spec, double t,
                                            const Eigen::VectorXd& x);

// 1D stable semigroup by quadrature against the density grid.
double stable_semigroup_quad_1d(const TestFunction& f, double t, double x, const DensityGrid1D& density,
                                double tol = 1e-10);

// Polar Levy weights sigma_i = lambda_i / K_alpha of a discrete spectral measure.
double levy_polar_weight(const SpectralAtom& atom, double alpha);

// D^{alpha-1} f(x) = sum_i sigma_i s_i int_0^inf (f(x + r s_i) - f(x)) r^{-alpha} dr
Eigen::VectorXd frac_gradient(const TestFunction& f, const Eigen::VectorXd& x, const SpectralMeasure& spectral,
                              double alpha, double tol = 1e-10);
// Multiplier m with D^{alpha-1} e_xi = m(xi) e_xi, e_xi(x) = exp(i <xi, x>).
Eigen::VectorXcd fractional_multiplier(const Eigen::VectorXd& xi, const SpectralMeasure& spectral, double alpha);
// gradient of the characteristic function of a stable spec
Eigen::VectorXcd stable_cf_gradient(const MeasureSpec& spec, const Eigen::VectorXd& eta);

enum class BismutLhs { Quadrature, Multiplier };

struct BismutCheck {
  Eigen::VectorXd lhs;
  Eigen::VectorXd rhs;
  double gap = 0.0;        // ||lhs - rhs||
  double std_error = 0.0;  // Monte Carlo error of the sides estimated by sampling, 0 when both are analytic
};

// D^{alpha-1} P_t f(x) against e^{-(alpha-1)t} / (1 - e^{-alpha t})^{1 - 1/alpha} E[Y f(x e^{-t} + c Y)].
// Characters: rhs in closed form, lhs by quadrature (or through the multiplier).
// SmoothBump (1D): lhs by quadrature of the quadrature-evaluated P_t f, rhs by
// Monte Carlo with mc_budget draws.
BismutCheck bismut_stable_check(const TestFunction& f, double t, const Eigen::VectorXd& x, const MeasureSpec& spec,
                                std::size_t mc_budget, std::uint64_t seed, BismutLhs mode = BismutLhs::Quadrature,
                                std::shared_ptr<const DensityGrid1D> density = nullptr);

// d/dx P_t f(x) = -(e^{-t} / c) E[(p'/p)(Y) f(x e^{-t} + c Y)], 1D, by Monte Carlo.
SemigroupValue gradient_bismut_stable(const TestFunction& f, double t, double x, const DensityGrid1D& density,
                                      std::size_t mc_budget, std::uint64_t seed);

struct MatrixEstimate {
  Eigen::MatrixXd value;
  Eigen::MatrixXd std_error;  // entrywise
  // standard error of the Hilbert-Schmidt norm (delta method)
  double hs_std_error = 0.0;
  // covariance of the column-major vectorized estimate
  Eigen::MatrixXd entry_cov;
};

// Hess f_h(x) = -int_0^{pi/2} E[Sigma^{-1} Y grad h(x cos th + sin th Y)^T] cos th dth, sin th = sqrt(1 - e^{-2t});
// 64 Gauss-Legendre nodes in th, antithetic Monte Carlo in Y.
MatrixEstimate gaussian_hessian_bismut(const TestFunction& h, const Eigen::VectorXd& x, const Eigen::MatrixXd& sigma,
                                       std::size_t mc_budget, std::uint64_t seed, std::uint64_t substream = 0);

struct GammaTransformResult {
  double value = 0.0;
  bool diverged = false;
};

// (1 / Gamma(r/2)) int_0^inf e^{-lambda t} t^{r/2 - 1} P_t f(x) dt over the
// closed-form semigroup of `spec` (Gaussian or stable).
GammaTransformResult gamma_transform(const MeasureSpec& spec, double r, double lambda, const TestFunction& f,
                                     const Eigen::VectorXd& x);

// T_t g(x) = e^t E g(e^t x + (e^{alpha t} - 1)^{1/alpha} Z) on the density grid.
Eigen::VectorXd t_family_1d(const Eigen::VectorXd& g, double t, const DensityGrid1D& density);
// (P_t)^* g = T_t(g p) / p
Eigen::VectorXd dual_semigroup_1d(const Eigen::VectorXd& g, double t, const DensityGrid1D& density);
// P_t f on the density grid by FFT convolution
Eigen::VectorXd stable_semigroup_grid_1d(const Eigen::VectorXd& f, double t, const DensityGrid1D& density);

}  // namespace steinlab

#pragma once

#include "steinlab/rng.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace steinlab {

struct SpectralAtom {
  Eigen::VectorXd direction;
  double weight = 0.0;
};

// Symmetric discrete measure on the unit sphere. Atom weights are the lambda_i
// of the characteristic function exp(-sum_i lambda_i |<s_i, xi>|^alpha).
struct SpectralMeasure {
  std::vector<SpectralAtom> atoms;

  int dim() const { return atoms.empty() ? 0 : static_cast<int>(atoms.front().direction.size()); }
  // unit directions, closed under s -> -s with equal weights
  void validate() const;

  // +-e_i, each with the given weight
  static SpectralMeasure axes(int d, double weight);
  // `count` equispaced directions on the circle (count even), equal weights
  // summing to total_weight
  static SpectralMeasure circle(int count, double total_weight);
  // the one-dimensional pair +-1 with weight 1/4, i.e. exp(-|xi|^alpha / 2)
  static SpectralMeasure standard_1d();
};

enum class MeasureKind {
  Gaussian,
  Stable,
  StableRotInv,
  ExpPower,
  Gamma,
  Beta,
  CenteredExponential,
  Uniform,
  LogConcave
};

std::string to_string(MeasureKind kind);
MeasureKind measure_kind_from_string(const std::string& name);

using Potential = std::function<double(const Eigen::VectorXd&)>;

// Tagged description of a sampleable law. Only the fields relevant to `kind`
// are read.
struct MeasureSpec {
  MeasureKind kind = MeasureKind::Gaussian;
  int d = 1;
  Eigen::MatrixXd sigma;      // Gaussian, LogConcave (curvature reference)
  double alpha = 0.0;         // Stable, StableRotInv index; Gamma shape; Beta first parameter
  double beta = 0.0;          // Beta second parameter
  double delta = 0.0;         // ExpPower
  bool radial = false;        // ExpPower: exp(-|x|^delta) (false, product) or exp(-||x||^delta)
  SpectralMeasure spectral;   // Stable
  Potential potential;        // LogConcave, V with Hess V >= kappa Sigma^{-1}
  double kappa = 1.0;         // LogConcave
  Eigen::VectorXd mode;       // LogConcave minimizer of V
  std::string label;          // LogConcave: name of the shipped potential, for serialization

  static MeasureSpec gaussian(const Eigen::MatrixXd& sigma);
  static MeasureSpec stable(double alpha, const SpectralMeasure& spectral);
  static MeasureSpec stable_rot_inv(double alpha, int d);
  static MeasureSpec exp_power(double delta, int d, bool radial = false);
  static MeasureSpec gamma(double shape);
  static MeasureSpec beta_dist(double a, double b);
  static MeasureSpec centered_exponential(int d = 1);
  // uniform on [-sqrt 3, sqrt 3]^d, unit covariance
  static MeasureSpec uniform(int d = 1);
  static MeasureSpec log_concave(const Potential& v, double kappa, const Eigen::MatrixXd& sigma,
                                 const Eigen::VectorXd& mode);

  void validate() const;
  bool has_closed_form_cf() const;
  bool infinitely_divisible() const;
  // analytic mean and covariance; throws for heavy-tailed kinds
  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;
};

// V(x) = sum_i (x_i^2 / 2 + b x_i^4) with b chosen so that each coordinate
// has variance kappa; Hess V >= I = kappa (kappa I)^{-1}. Covariance kappa I.
MeasureSpec log_concave_quartic(int d, double kappa);

struct SampleBatch {
  Eigen::MatrixXd data;  // n x d
  std::uint64_t seed = 0;
  std::uint64_t substream = 0;
};

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxRejectionProposals = 1000000;

// Rows are i.i.d. draws; deterministic in (spec, n, seed, substream).
SampleBatch sample(const MeasureSpec& spec, std::size_t n, std::uint64_t seed, std::uint64_t substream = 0);
// One draw from an existing stream.
Eigen::VectorXd draw(const MeasureSpec& spec, Rng& rng);

// 1D symmetric alpha-stable with characteristic function exp(-|xi|^alpha / 2)
double draw_stable_1d(double alpha, Rng& rng);
// positive beta-stable with Laplace transform exp(-s^beta), beta in (0, 1)
double draw_positive_stable(double beta, Rng& rng);

std::complex<double> characteristic_function(const MeasureSpec& spec, const Eigen::VectorXd& xi);
// mean of exp(i <xi, row>) over the batch
std::complex<double> empirical_cf(const Eigen::MatrixXd& data, const Eigen::VectorXd& xi);

// (X_z, Y_z) with X_z = W + V, Y_z = W + V', W carrying the z-fraction of the
// law and V, V' independent (1-z)-fractions. Gaussian and stable kinds only.
std::pair<SampleBatch, SampleBatch> sample_interpolation_pair(const MeasureSpec& spec, double z, std::size_t n,
                                                              std::uint64_t seed, std::uint64_t substream = 0);

// min over a deterministic sphere grid of sum_i lambda_i |<y, s_i>|^alpha.
// d = 1: the single point; d = 2: `grid_size` angles; d >= 3: Fibonacci-type
// points and their antipodes.
double check_nondegenerate(const SpectralMeasure& spectral, double alpha, int grid_size = 10000);

}  // namespace steinlab

#include "steinlab/measures.hpp"

#include "steinlab/quadrature.hpp"
#include "steinlab/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace steinlab {

namespace {

bool symmetric_positive_definite(const Eigen::MatrixXd& s) {
  if (s.rows() != s.cols() || s.rows() == 0) return false;
  if (!s.isApprox(s.transpose(), 1e-12)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  return llt.info() == Eigen::Success;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void SpectralMeasure::validate() const {
  require(!atoms.empty(), "spectral measure: no atoms");
  const int d = dim();
  for (const auto& a : atoms) {
    require(a.direction.size() == d, "spectral measure: mixed dimensions");
    require(a.weight > 0.0, "spectral measure: weights must be positive");
    require(std::abs(a.direction.norm() - 1.0) < 1e-12, "spectral measure: directions must be unit vectors");
  }
  for (const auto& a : atoms) {
    bool found = false;
    for (const auto& b : atoms) {
      if ((a.direction + b.direction).norm() < 1e-12 && std::abs(a.weight - b.weight) <= 1e-12 * a.weight) {
        found = true;
        break;
      }
    }
    require(found, "spectral measure: atoms must come in +-s pairs with equal weights");
  }
}

SpectralMeasure SpectralMeasure::axes(int d, double weight) {
  SpectralMeasure m;
  for (int i = 0; i < d; ++i) {
    for (double sgn : {1.0, -1.0}) {
      SpectralAtom a;
      a.direction = Eigen::VectorXd::Zero(d);
      a.direction(i) = sgn;
      a.weight = weight;
      m.atoms.push_back(a);
    }
  }
  return m;
}

SpectralMeasure SpectralMeasure::circle(int count, double total_weight) {
  require(count >= 2 && count % 2 == 0, "circle spectral measure: count must be even");
  SpectralMeasure m;
  for (int k = 0; k < count; ++k) {
    const double th = 2.0 * M_PI * k / count;
    SpectralAtom a;
    a.direction = Eigen::Vector2d(std::cos(th), std::sin(th));
    // exact antipodes
    if (k >= count / 2) a.direction = -m.atoms[k - count / 2].direction;
    a.weight = total_weight / count;
    m.atoms.push_back(a);
  }
  return m;
}

SpectralMeasure SpectralMeasure::standard_1d() { return axes(1, 0.25); }

std::string to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::Gaussian: return "gaussian";
    case MeasureKind::Stable: return "stable";
    case MeasureKind::StableRotInv: return "stable_rot_inv";
    case MeasureKind::ExpPower: return "exp_power";
    case MeasureKind::Gamma: return "gamma";
    case MeasureKind::Beta: return "beta";
    case MeasureKind::CenteredExponential: return "centered_exponential";
    case MeasureKind::Uniform: return "uniform";
    case MeasureKind::LogConcave: return "log_concave";
  }
  return "unknown";
}

MeasureKind measure_kind_from_string(const std::string& name) {
  for (auto k : {MeasureKind::Gaussian, MeasureKind::Stable, MeasureKind::StableRotInv, MeasureKind::ExpPower,
                 MeasureKind::Gamma, MeasureKind::Beta, MeasureKind::CenteredExponential, MeasureKind::Uniform,
                 MeasureKind::LogConcave})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unsupported measure kind '" + name + "'");
}

MeasureSpec MeasureSpec::gaussian(const Eigen::MatrixXd& sigma) {
  MeasureSpec s;
  s.kind = MeasureKind::Gaussian;
  s.d = static_cast<int>(sigma.rows());
  s.sigma = sigma;
  s.validate();
  return s;
}

MeasureSpec MeasureSpec::stable(double alpha, const SpectralMeasure& spectral) {
  MeasureSpec s;
  s.kind = MeasureKind::Stable;
  s.alpha = alpha;
  s.spectral = spectral;
  s.d = spectral.dim();
  s.validate();
  return s;
}

MeasureSpec MeasureSpec::stable_rot_inv(double alpha, int d) {
  MeasureSpec s;
  s.kind = MeasureKind::StableRotInv;
  s.alpha = alpha;
  s.d = d;
  s.validate();
  return s;
}

MeasureSpec MeasureSpec::exp_power(double delta, int d, bool radial) {
  MeasureSpec s;
  s.kind = MeasureKind::ExpPower;
  s.delta = delta;
  s.d = d;
  s.radial = radial;
  s.validate();
  return s;
}

MeasureSpec MeasureSpec::gamma(double shape) {
  MeasureSpec s;
  s.kind = MeasureKind::Gamma;
  s.alpha = shape;
  s.validate();
  return s;
}

MeasureSpec MeasureSpec::beta_dist(double a, double b) {
  MeasureSpec s;
  s.kind = MeasureKind::Beta;
  s.alpha = a;
  s.beta = b;
  s.validate();
  return s;
}

MeasureSpec MeasureSpec::centered_exponential(int d) {
  MeasureSpec s;
  s.kind = MeasureKind::CenteredExponential;
  s.d = d;
  s.validate();
  return s;
}

MeasureSpec MeasureSpec::uniform(int d) {
  MeasureSpec s;
  s.kind = MeasureKind::Uniform;
  s.d = d;
  s.validate();
  return s;
}

MeasureSpec MeasureSpec::log_concave(const Potential& v, double kappa, const Eigen::MatrixXd& sigma,
                                     const Eigen::VectorXd& mode) {
  MeasureSpec s;
  s.kind = MeasureKind::LogConcave;
  s.potential = v;
  s.kappa = kappa;
  s.sigma = sigma;
  s.mode = mode;
  s.d = static_cast<int>(sigma.rows());
  s.validate();
  return s;
}

void MeasureSpec::validate() const {
  require(d >= 1, "measure: dimension must be positive");
  switch (kind) {
    case MeasureKind::Gaussian:
      require(sigma.rows() == d && symmetric_positive_definite(sigma), "gaussian: Sigma must be SPD");
      break;
    case MeasureKind::Stable:
      require(alpha > 1.0 && alpha < 2.0, "stable: alpha must lie in (1, 2)");
      spectral.validate();
      require(spectral.dim() == d, "stable: spectral dimension mismatch");
      break;
    case MeasureKind::StableRotInv:
      require(alpha > 1.0 && alpha < 2.0, "stable_rot_inv: alpha must lie in (1, 2)");
      break;
    case MeasureKind::ExpPower:
      require(delta > 0.0 && delta < 1.0, "exp_power: delta must lie in (0, 1)");
      break;
    case MeasureKind::Gamma:
      require(d == 1, "gamma: one-dimensional");
      require(alpha >= 0.5, "gamma: shape must be >= 1/2");
      break;
    case MeasureKind::Beta:
      require(d == 1, "beta: one-dimensional");
      require(alpha > 1.5 && beta > 1.5, "beta: parameters must exceed 3/2");
      break;
    case MeasureKind::CenteredExponential:
    case MeasureKind::Uniform:
      break;
    case MeasureKind::LogConcave:
      require(d <= 4, "log_concave: rejection sampler limited to d <= 4");
      require(static_cast<bool>(potential), "log_concave: missing potential");
      require(kappa > 0.0 && kappa <= 1.0, "log_concave: kappa must lie in (0, 1]");
      require(sigma.rows() == d && symmetric_positive_definite(sigma), "log_concave: Sigma must be SPD");
      require(mode.size() == d, "log_concave: mode dimension mismatch");
      break;
  }
}

bool MeasureSpec::has_closed_form_cf() const {
  return kind == MeasureKind::Gaussian || kind == MeasureKind::Stable || kind == MeasureKind::StableRotInv;
}

bool MeasureSpec::infinitely_divisible() const { return has_closed_form_cf(); }

Eigen::VectorXd MeasureSpec::mean() const {
  switch (kind) {
    case MeasureKind::Gamma: return Eigen::VectorXd::Constant(1, alpha);
    case MeasureKind::Beta: return Eigen::VectorXd::Constant(1, (beta - alpha) / (alpha + beta));
    case MeasureKind::LogConcave: return mode;
    default: return Eigen::VectorXd::Zero(d);
  }
}

Eigen::MatrixXd MeasureSpec::covariance() const {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  switch (kind) {
    case MeasureKind::Gaussian:
    case MeasureKind::LogConcave: return sigma;
    case MeasureKind::Stable:
    case MeasureKind::StableRotInv: throw std::invalid_argument("stable laws have infinite variance");
    case MeasureKind::ExpPower:
      if (radial)
        return std::exp(std::lgamma((d + 2.0) / delta) - std::lgamma(d / delta)) / d * id;
      return std::exp(std::lgamma(3.0 / delta) - std::lgamma(1.0 / delta)) * id;
    case MeasureKind::Gamma: return alpha * id;
    case MeasureKind::Beta: {
      const double s = alpha + beta;
      return 4.0 * alpha * beta / (s * s * (s + 1.0)) * id;
    }
    case MeasureKind::CenteredExponential:
    case MeasureKind::Uniform: return id;
  }
  return id;
}

MeasureSpec log_concave_quartic(int d, double kappa) {
  require(kappa > 0.0 && kappa <= 1.0, "log_concave_quartic: kappa must lie in (0, 1]");
  auto variance = [](double b) {
    QuadOptions opt;
    opt.abs_tol = 1e-14;
    const double inf = std::numeric_limits<double>::infinity();
    auto w = [b](double x) { return std::exp(-0.5 * x * x - b * x * x * x * x); };
    const double z = integrate<double>(w, 0.0, inf, opt).value;
    const double m2 = integrate<double>([&](double x) { return x * x * w(x); }, 0.0, inf, opt).value;
    return m2 / z;
  };
  double lo = 0.0, hi = 1.0;
  while (variance(hi) > kappa) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (variance(mid) > kappa ? lo : hi) = mid;
  }
  const double b = (kappa >= 1.0) ? 0.0 : 0.5 * (lo + hi);
  Potential v = [b](const Eigen::VectorXd& x) {
    return 0.5 * x.squaredNorm() + b * x.array().pow(4).sum();
  };
  MeasureSpec s = MeasureSpec::log_concave(v, kappa, kappa * Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d));
  s.label = "quartic";
  return s;
}

double draw_stable_1d(double alpha, Rng& rng) {
  // Chambers-Mallows-Stuck, symmetric case, rescaled from exp(-|xi|^alpha)
  const double v = M_PI * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  const double x = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
                   std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
  return std::pow(2.0, -1.0 / alpha) * x;
}

double draw_positive_stable(double beta, Rng& rng) {
  // Kanter's representation
  const double u = M_PI * rng.uniform();
  const double e = rng.exponential();
  const double a = std::pow(std::pow(std::sin(beta * u), beta) * std::pow(std::sin((1.0 - beta) * u), 1.0 - beta) /
                                std::sin(u),
                            1.0 / (1.0 - beta));
  return std::pow(a / e, (1.0 - beta) / beta);
}

namespace {

Eigen::VectorXd draw_log_concave(const MeasureSpec& spec, Rng& rng) {
  const Eigen::MatrixXd prop_cov = spec.sigma / spec.kappa;
  const Eigen::MatrixXd chol = prop_cov.llt().matrixL();
  const Eigen::MatrixXd prec = spec.kappa * spec.sigma.inverse();
  const double v0 = spec.potential(spec.mode);
  for (std::size_t k = 0; k < kMaxRejectionProposals; ++k) {
    Eigen::VectorXd z(spec.d);
    for (int i = 0; i < spec.d; ++i) z(i) = rng.normal();
    const Eigen::VectorXd dx = chol * z;
    const Eigen::VectorXd x = spec.mode + dx;
    const double excess = spec.potential(x) - v0 - 0.5 * dx.dot(prec * dx);
    if (excess < -1e-9 * (1.0 + std::abs(v0)))
      throw SamplerError("log_concave: potential violates the curvature bound at a proposal");
    if (rng.uniform() <= std::exp(-std::max(excess, 0.0))) return x;
  }
  throw SamplerError("log_concave: rejection sampler exceeded the proposal cap");
}

}  // namespace

Eigen::VectorXd draw(const MeasureSpec& spec, Rng& rng) {
  const int d = spec.d;
  Eigen::VectorXd x(d);
  switch (spec.kind) {
    case MeasureKind::Gaussian: {
      Eigen::VectorXd z(d);
      for (int i = 0; i < d; ++i) z(i) = rng.normal();
      return spec.sigma.llt().matrixL() * z;
    }
    case MeasureKind::Stable: {
      x.setZero();
      for (const auto& a : spec.spectral.atoms)
        x += std::pow(2.0 * a.weight, 1.0 / spec.alpha) * draw_stable_1d(spec.alpha, rng) * a.direction;
      return x;
    }
    case MeasureKind::StableRotInv: {
      const double amp = draw_positive_stable(0.5 * spec.alpha, rng);
      const double sd = std::sqrt(2.0) * std::pow(2.0, -1.0 / spec.alpha);
      for (int i = 0; i < d; ++i) x(i) = rng.normal();
      return std::sqrt(amp) * sd * x;
    }
    case MeasureKind::ExpPower: {
      const double inv = 1.0 / spec.delta;
      if (spec.radial) {
        const double r = std::pow(gamma_q_inverse(d * inv, rng.uniform()), inv);
        for (int i = 0; i < d; ++i) x(i) = rng.normal();
        return r * x / x.norm();
      }
      for (int i = 0; i < d; ++i) {
        const double r = std::pow(gamma_q_inverse(inv, rng.uniform()), inv);
        x(i) = (rng.uniform() < 0.5) ? -r : r;
      }
      return x;
    }
    case MeasureKind::Gamma:
      x(0) = rng.gamma(spec.alpha);
      return x;
    case MeasureKind::Beta:
      x(0) = 2.0 * rng.beta(spec.beta, spec.alpha) - 1.0;
      return x;
    case MeasureKind::CenteredExponential:
      for (int i = 0; i < d; ++i) x(i) = rng.exponential() - 1.0;
      return x;
    case MeasureKind::Uniform:
      for (int i = 0; i < d; ++i) x(i) = rng.uniform(-std::sqrt(3.0), std::sqrt(3.0));
      return x;
    case MeasureKind::LogConcave: return draw_log_concave(spec, rng);
  }
  throw std::invalid_argument("sample: unsupported kind");
}

SampleBatch sample(const MeasureSpec& spec, std::size_t n, std::uint64_t seed, std::uint64_t substream) {
  if (n < 1) throw std::invalid_argument("sample: n must be positive");
  spec.validate();
  Rng rng(seed, substream);
  SampleBatch b;
  b.seed = seed;
  b.substream = substream;
  b.data.resize(static_cast<Eigen::Index>(n), spec.d);
  for (std::size_t i = 0; i < n; ++i) b.data.row(static_cast<Eigen::Index>(i)) = draw(spec, rng).transpose();
  return b;
}

std::complex<double> characteristic_function(const MeasureSpec& spec, const Eigen::VectorXd& xi) {
  if (xi.size() != spec.d) throw std::invalid_argument("characteristic_function: dimension mismatch");
  switch (spec.kind) {
    case MeasureKind::Gaussian: return std::exp(-0.5 * xi.dot(spec.sigma * xi));
    case MeasureKind::Stable: {
      double s = 0.0;
      for (const auto& a : spec.spectral.atoms) s += a.weight * std::pow(std::abs(a.direction.dot(xi)), spec.alpha);
      return std::exp(-s);
    }
    case MeasureKind::StableRotInv: return std::exp(-0.5 * std::pow(xi.norm(), spec.alpha));
    default: throw std::invalid_argument("characteristic_function: no closed form for " + to_string(spec.kind));
  }
}

std::complex<double> empirical_cf(const Eigen::MatrixXd& data, const Eigen::VectorXd& xi) {
  const Eigen::VectorXd ph = data * xi;
  double c = 0.0, s = 0.0;
  for (Eigen::Index i = 0; i < ph.size(); ++i) {
    c += std::cos(ph(i));
    s += std::sin(ph(i));
  }
  const double n = static_cast<double>(ph.size());
  return {c / n, s / n};
}

std::pair<SampleBatch, SampleBatch> sample_interpolation_pair(const MeasureSpec& spec, double z, std::size_t n,
                                                              std::uint64_t seed, std::uint64_t substream) {
  if (!(z >= 0.0 && z <= 1.0)) throw std::invalid_argument("sample_interpolation_pair: z must lie in [0, 1]");
  if (!spec.infinitely_divisible())
    throw std::invalid_argument("sample_interpolation_pair: needs an infinitely divisible kind with scaling");
  if (n < 1) throw std::invalid_argument("sample_interpolation_pair: n must be positive");
  spec.validate();
  const double index = (spec.kind == MeasureKind::Gaussian) ? 2.0 : spec.alpha;
  const double cw = std::pow(z, 1.0 / index);
  const double cv = std::pow(1.0 - z, 1.0 / index);
  Rng rng(seed, substream);
  SampleBatch a, b;
  a.seed = b.seed = seed;
  a.substream = b.substream = substream;
  a.data.resize(static_cast<Eigen::Index>(n), spec.d);
  b.data.resize(static_cast<Eigen::Index>(n), spec.d);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd w = draw(spec, rng);
    const Eigen::VectorXd v1 = draw(spec, rng);
    const Eigen::VectorXd v2 = draw(spec, rng);
    const auto r = static_cast<Eigen::Index>(i);
    a.data.row(r) = (cw * w + cv * v1).transpose();
    b.data.row(r) = (cw * w + cv * v2).transpose();
  }
  return {a, b};
}

double check_nondegenerate(const SpectralMeasure& spectral, double alpha, int grid_size) {
  if (spectral.atoms.empty()) throw std::invalid_argument("check_nondegenerate: no atoms");
  const int d = spectral.dim();
  auto functional = [&](const Eigen::VectorXd& y) {
    double s = 0.0;
    for (const auto& a : spectral.atoms) s += a.weight * std::pow(std::abs(y.dot(a.direction)), alpha);
    return s;
  };
  if (d == 1) return functional(Eigen::VectorXd::Ones(1));
  double best = std::numeric_limits<double>::infinity();
  if (d == 2) {
    for (int k = 0; k < grid_size; ++k) {
      const double th = 2.0 * M_PI * k / grid_size;
      best = std::min(best, functional(Eigen::Vector2d(std::cos(th), std::sin(th))));
    }
    return best;
  }
  // generalized spiral points: Gaussian quantiles of a Halton-like sequence
  // mapped to the sphere, plus the coordinate axes
  for (int i = 0; i < d; ++i) best = std::min(best, functional(Eigen::VectorXd::Unit(d, i)));
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int k = 0; k < grid_size; ++k) {
    Eigen::VectorXd y(d);
    for (int i = 0; i < d; ++i) {
      const double u = std::fmod((k + 0.5) * std::pow(golden, 1.0 / (i + 1)) + 0.5 * i / d, 1.0);
      y(i) = normal_quantile(std::clamp(u, 1e-12, 1.0 - 1e-12));
    }
    const double nrm = y.norm();
    if (nrm > 0.0) best = std::min(best, functional(y / nrm));
  }
  return best;
}

}  // namespace steinlab

#include "steinlab/stein.hpp"

#include "steinlab/parallel.hpp"
#include "steinlab/quadrature.hpp"
#include "steinlab/semigroups.hpp"
#include "steinlab/special.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace steinlab {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
constexpr double kInf = std::numeric_limits<double>::infinity();

QuadOptions quad_opts(double tol) {
  QuadOptions opt;
  opt.abs_tol = tol;
  opt.max_subdivisions = 20000;
  return opt;
}

SteinKernelField scalar_field(const std::string& name, std::function<double(double)> tau, double var, double mean,
                              const std::string& support) {
  SteinKernelField k;
  k.name = name;
  k.d = 1;
  k.evaluator = [tau](const Vec& x) { return Mat::Constant(1, 1, tau(x(0))); };
  k.target_sigma = Mat::Constant(1, 1, var);
  k.mean = Vec::Constant(1, mean);
  k.support = support;
  k.diagonal = true;
  return k;
}

double exp_power_tau(double delta, double x) {
  const double a = std::pow(std::abs(x), delta);
  return upper_incomplete_gamma_scaled(2.0 / delta, a) / delta;
}

double op_norm_inv_sqrt(const Mat& sigma) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0.0)) throw std::invalid_argument("target covariance must be nondegenerate");
  return 1.0 / std::sqrt(lmin);
}

}  // namespace

SteinKernelField kernel_1d_from_density(std::function<double(double)> density, double lo, double hi, bool log_scale) {
  if (!(hi > lo)) throw std::invalid_argument("kernel_1d_from_density: empty support");
  std::function<double(double)> logp;
  if (log_scale) {
    logp = density;
  } else {
    logp = [density](double y) { return std::log(density(y)); };
  }
  const QuadOptions opt = quad_opts(1e-13);
  // shift so that the mass integrals stay O(1)
  double ref = logp(std::clamp(0.0, lo, hi));
  if (!std::isfinite(ref) && std::isfinite(lo) && std::isfinite(hi)) ref = logp(0.5 * (lo + hi));
  auto w = [logp, ref](double y) {
    const double lv = logp(y);
    return std::isfinite(lv) ? std::exp(lv - ref) : 0.0;
  };
  const double mass = integrate<double>(w, lo, hi, opt).value;
  const double m1 = integrate<double>([&](double y) { return y * w(y); }, lo, hi, opt).value / mass;
  const double m2 = integrate<double>([&](double y) { return y * y * w(y); }, lo, hi, opt).value / mass;
  if (!(mass > 0.0)) throw std::invalid_argument("kernel_1d_from_density: density has no mass");
  if (std::abs(m1) > 1e-8 * std::max(1.0, std::sqrt(m2)))
    throw std::invalid_argument("kernel_1d_from_density: density is not centered");
  auto tau = [logp, lo, hi](double x) {
    const QuadOptions o = quad_opts(1e-13);
    if (!(x > lo && x < hi)) return 0.0;
    const double lx = logp(x);
    if (x >= 0.0) {
      auto f = [&](double v) {
        const double l = logp(x + v);
        return std::isfinite(l) ? (x + v) * std::exp(l - lx) : 0.0;
      };
      return integrate<double>(f, 0.0, hi - x, o).value;
    }
    auto f = [&](double v) {
      const double l = logp(x - v);
      return std::isfinite(l) ? (x - v) * std::exp(l - lx) : 0.0;
    };
    return -integrate<double>(f, 0.0, x - lo, o).value;
  };
  auto fmt = [](double v) {
    if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
    return std::to_string(v);
  };
  return scalar_field("density_kernel", tau, m2 - m1 * m1, 0.0, "(" + fmt(lo) + ", " + fmt(hi) + ")");
}

SteinKernelField kernel_1d(const MeasureSpec& spec) {
  spec.validate();
  if (spec.d != 1) throw std::invalid_argument("kernel_1d: one-dimensional spec required");
  switch (spec.kind) {
    case MeasureKind::Gaussian: {
      const double s = spec.sigma(0, 0);
      return scalar_field("gaussian", [s](double) { return s; }, s, 0.0, "R");
    }
    case MeasureKind::CenteredExponential:
      return scalar_field("centered_exponential", [](double x) { return x > -1.0 ? x + 1.0 : 0.0; }, 1.0, 0.0,
                          "(-1, inf)");
    case MeasureKind::Uniform:
      return scalar_field("uniform", [](double x) { return std::max(0.0, 0.5 * (3.0 - x * x)); }, 1.0, 0.0,
                          "[-sqrt3, sqrt3]");
    case MeasureKind::ExpPower: {
      const double delta = spec.delta;
      return scalar_field("exp_power", [delta](double x) { return exp_power_tau(delta, x); },
                          spec.covariance()(0, 0), 0.0, "R");
    }
    case MeasureKind::Gamma:
      return scalar_field("gamma", [](double x) { return std::max(0.0, x); }, spec.alpha, spec.alpha, "(0, inf)");
    case MeasureKind::Beta: {
      const double s = spec.alpha + spec.beta;
      return scalar_field("beta", [s](double x) { return std::max(0.0, (1.0 - x * x) / s); }, spec.covariance()(0, 0),
                          spec.mean()(0), "(-1, 1)");
    }
    case MeasureKind::LogConcave: {
      auto v = spec.potential;
      const double m = spec.mode(0);
      auto k = kernel_1d_from_density([v, m](double x) { return -v(Vec::Constant(1, x + m)); }, -kInf, kInf, true);
      k.name = "log_concave_" + spec.label;
      k.mean = Vec::Constant(1, m);
      auto inner = k.evaluator;
      k.evaluator = [inner, m](const Vec& x) { return inner(Vec::Constant(1, x(0) - m)); };
      return k;
    }
    default: throw std::invalid_argument("kernel_1d: no kernel for " + to_string(spec.kind));
  }
}

SteinKernelField product_kernel(const std::vector<MeasureSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("product_kernel: no marginals");
  std::vector<SteinKernelField> parts;
  for (const auto& s : specs) parts.push_back(kernel_1d(s));
  const int d = static_cast<int>(parts.size());
  SteinKernelField k;
  k.name = "product";
  k.d = d;
  k.diagonal = true;
  k.target_sigma = Mat::Zero(d, d);
  k.mean = Vec(d);
  for (int i = 0; i < d; ++i) {
    k.target_sigma(i, i) = parts[i].target_sigma(0, 0);
    k.mean(i) = parts[i].mean(0);
  }
  k.support = parts.front().support + "^" + std::to_string(d);
  k.evaluator = [parts, d](const Vec& x) {
    Mat t = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) t(i, i) = parts[i](Vec::Constant(1, x(i)))(0, 0);
    return t;
  };
  return k;
}

SteinKernelField product_kernel(const MeasureSpec& spec) {
  spec.validate();
  std::vector<MeasureSpec> marg;
  switch (spec.kind) {
    case MeasureKind::CenteredExponential: marg.assign(spec.d, MeasureSpec::centered_exponential(1)); break;
    case MeasureKind::Uniform: marg.assign(spec.d, MeasureSpec::uniform(1)); break;
    case MeasureKind::ExpPower:
      if (spec.radial) throw std::invalid_argument("product_kernel: radial exp-power is not a product (use tau_radial_multid)");
      marg.assign(spec.d, MeasureSpec::exp_power(spec.delta, 1, false));
      break;
    case MeasureKind::Gaussian: {
      const Mat off = spec.sigma - Mat(spec.sigma.diagonal().asDiagonal());
      if (off.cwiseAbs().maxCoeff() > 0.0) {
        // tau = Sigma for any Gaussian
        SteinKernelField k;
        k.name = "gaussian";
        k.d = spec.d;
        const Mat s = spec.sigma;
        k.evaluator = [s](const Vec&) { return s; };
        k.target_sigma = s;
        k.mean = Vec::Zero(spec.d);
        return k;
      }
      for (int i = 0; i < spec.d; ++i) marg.push_back(MeasureSpec::gaussian(Mat::Constant(1, 1, spec.sigma(i, i))));
      break;
    }
    case MeasureKind::LogConcave: {
      if (spec.label != "quartic") throw std::invalid_argument("product_kernel: only the separable quartic potential");
      const auto v = spec.potential;
      const int d = spec.d;
      MeasureSpec one = spec;
      one.d = 1;
      one.potential = [v, d](const Vec& x) {
        Vec y = Vec::Zero(d);
        y(0) = x(0);
        return v(y);
      };
      one.sigma = spec.sigma.topLeftCorner(1, 1);
      one.mode = spec.mode.head(1);
      return product_kernel(std::vector<MeasureSpec>(d, one));
    }
    default:
      if (spec.d == 1) return kernel_1d(spec);
      throw std::invalid_argument("product_kernel: " + to_string(spec.kind) + " is not a product measure");
  }
  auto k = product_kernel(marg);
  k.name = to_string(spec.kind) + "_product";
  return k;
}

double tau_radial(double delta, double norm) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("tau_radial: delta must lie in (0, 1)");
  return exp_power_tau(delta, norm);
}

SteinKernelField tau_radial_multid(double delta, int d) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("tau_radial_multid: delta must lie in (0, 1)");
  if (d < 2) throw std::invalid_argument("tau_radial_multid: d >= 2");
  SteinKernelField k;
  k.name = "exp_power_radial";
  k.d = d;
  k.diagonal = true;
  k.evaluator = [delta, d](const Vec& x) { return Mat(exp_power_tau(delta, x.norm()) * Mat::Identity(d, d)); };
  k.target_sigma = MeasureSpec::exp_power(delta, d, true).covariance();
  k.mean = Vec::Zero(d);
  return k;
}

DiscrepancyReport stein_discrepancy(const SteinKernelField& field, const MeasureSpec& spec, std::size_t mc_budget,
                                    std::uint64_t seed) {
  if (spec.d != field.d) throw std::invalid_argument("stein_discrepancy: dimension mismatch");
  const double scale = op_norm_inv_sqrt(field.target_sigma);
  const Mat sigma = field.target_sigma;
  auto m = mc_moments(mc_budget, seed, 0, 1, [&](Rng& rng) {
    const Vec x = draw(spec, rng);
    return Vec::Constant(1, (field(x) - sigma).squaredNorm());
  });
  DiscrepancyReport r;
  r.discrepancy = m.mean(0);
  r.std_error = m.std_error(0);
  r.w1_bound = scale * std::sqrt(std::max(0.0, r.discrepancy));
  r.budget = mc_budget;
  r.seed = seed;
  return r;
}

SumBound sum_discrepancy_bound(const DiscrepancyReport& marginal, int n) {
  if (n < 1) throw std::invalid_argument("sum_discrepancy_bound: n >= 1");
  SumBound b;
  b.discrepancy = marginal.discrepancy / n;
  b.w1_bound = marginal.w1_bound / std::sqrt(static_cast<double>(n));
  return b;
}

KernelIdentityCheck kernel_identity_check(const SteinKernelField& field, const MeasureSpec& spec,
                                          const VectorTestFunction& f, std::size_t mc_budget, std::uint64_t seed,
                                          std::uint64_t substream) {
  if (spec.d != field.d || f.d != field.d) throw std::invalid_argument("kernel_identity_check: dimension mismatch");
  const Vec mean = field.mean;
  auto m = mc_moments(mc_budget, seed, substream, 3, [&](Rng& rng) {
    const Vec x = draw(spec, rng);
    Vec s(3);
    s(0) = field(x).cwiseProduct(f.jacobian(x)).sum();
    s(1) = (x - mean).dot(f.value(x));
    s(2) = s(0) - s(1);
    return s;
  });
  KernelIdentityCheck c;
  c.lhs = m.mean(0);
  c.rhs = m.mean(1);
  c.std_error = m.std_error(2);
  return c;
}

double mu_delta_integral(const std::function<double(double)>& h, double delta, double lo, double hi, double tol) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("mu_delta_integral: delta must lie in (0, 1)");
  const double inv = 1.0 / delta;
  const double c = delta / (2.0 * std::tgamma(inv));
  QuadOptions opt = quad_opts(tol);
  opt.rel_tol = tol;
  double total = 0.0;
  auto weighted = [&](double u, double sign) {
    if (u <= 0.0) return 0.0;
    const double w = inv * std::pow(u, inv - 1.0) * std::exp(-u);
    return w < 1e-40 ? 0.0 : h(sign * std::pow(u, inv)) * w;
  };
  if (hi > 0.0) {
    const double a = std::pow(std::max(lo, 0.0), delta);
    const double b = std::isinf(hi) ? kInf : std::pow(hi, delta);
    if (b > a)
      total += integrate<double>([&](double u) { return weighted(u, 1.0); }, a, b, opt).value;
  }
  if (lo < 0.0) {
    const double a = std::pow(std::max(-hi, 0.0), delta);
    const double b = std::isinf(lo) ? kInf : std::pow(-lo, delta);
    if (b > a)
      total += integrate<double>([&](double u) { return weighted(u, -1.0); }, a, b, opt).value;
  }
  return c * total;
}

void check_lr_exponent(double r, double p) {
  if (!(p >= 2.0)) throw std::invalid_argument("Lr estimate: p must be >= 2");
  if (!(r >= 1.0)) throw std::invalid_argument("Lr estimate: r must be >= 1");
  // r/(r-1) > p/(p-1) iff r < p
  if (!(r < p)) throw std::invalid_argument("Lr estimate: r/(r-1) must exceed p/(p-1)");
}

namespace {

// int_a^b g(s u^{1/delta}) (1/delta) u^{1/delta - 1} e^{shift - u} du
double gp_integral(const std::function<double(double)>& g, double delta, double sign, double a, double b,
                   double shift) {
  const double inv = 1.0 / delta;
  if (!(b > a)) return 0.0;
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    return g(sign * std::pow(u, inv)) * inv * std::pow(u, inv - 1.0) * std::exp(shift - u);
  };
  QuadOptions opt = quad_opts(1e-13);
  opt.rel_tol = 1e-11;
  opt.throw_on_failure = false;
  const auto r = integrate<double>(f, a, b, opt);
  if (r.converged) return r.value;
  // centered g makes the value cancel; measure the error against int |integrand|
  QuadOptions coarse = quad_opts(1e-8);
  coarse.rel_tol = 1e-6;
  const double scale = integrate<double>([&](double u) { return std::abs(f(u)); }, a, b, coarse).value;
  if (r.abs_error_estimate > 1e-12 * std::max(scale, 1.0))
    throw QuadratureError("f_delta: quadrature did not converge");
  return r.value;
}

}  // namespace

FDelta::FDelta(std::function<double(double)> g, double delta, double p) : g_(std::move(g)), delta_(delta), p_(p) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("f_delta: delta must lie in (0, 1)");
  if (!(p >= 2.0)) throw std::invalid_argument("f_delta: p must be >= 2");
  const double c = delta / (2.0 * std::tgamma(1.0 / delta));
  g_mean_ = c * (gp_integral(g_, delta, 1.0, 0.0, kInf, 0.0) + gp_integral(g_, delta, -1.0, 0.0, kInf, 0.0));
  if (std::abs(g_mean_) > 1e-8) throw std::invalid_argument("f_delta: g is not centered under mu_delta");
}

double FDelta::right(double x) const {
  const double a = std::pow(std::abs(x), delta_);
  if (x >= 0.0) return gp_integral(g_, delta_, 1.0, a, kInf, a);
  return gp_integral(g_, delta_, -1.0, 0.0, a, a) + std::exp(a) * gp_integral(g_, delta_, 1.0, 0.0, kInf, 0.0);
}

double FDelta::left(double x) const {
  const double a = std::pow(std::abs(x), delta_);
  if (x <= 0.0) return -gp_integral(g_, delta_, -1.0, a, kInf, a);
  return -(std::exp(a) * gp_integral(g_, delta_, -1.0, 0.0, kInf, 0.0) + gp_integral(g_, delta_, 1.0, 0.0, a, a));
}

double FDelta::lr_norm(double r) const {
  check_lr_exponent(r, p_);
  const double v = mu_delta_integral([&](double x) { return std::pow(std::abs((*this)(x)), r); }, delta_, -kInf, kInf,
                                     1e-10);
  return std::pow(v, 1.0 / r);
}

FPrimitive::FPrimitive(std::function<double(double)> g, double delta, double p) : f_(std::move(g), delta, p) {
  const double inv = 1.0 / delta;
  const double c = delta / (2.0 * std::tgamma(inv));
  edges_.push_back(0.0);
  for (int k = 40; k >= 1; --k) edges_.push_back(std::pow(0.5, k));
  for (double u = 1.5; u <= 80.0 + 1e-12; u += 0.5) edges_.push_back(u);
  const GaussRule& rule = gauss_legendre(16);
  cum_pos_.assign(edges_.size(), 0.0);
  cum_neg_.assign(edges_.size(), 0.0);
  const Eigen::Index nq = rule.nodes.size();
  leg_pos_.assign((edges_.size() - 1) * static_cast<std::size_t>(nq), 0.0);
  leg_neg_.assign(leg_pos_.size(), 0.0);
  // F(0) = int_{-inf}^0 f S - int_0^inf f S with S(y) = mu_delta(|y|, inf)
  double fs_pos = 0.0, fs_neg = 0.0;
  for (std::size_t k = 0; k + 1 < edges_.size(); ++k) {
    const double a = edges_[k], b = edges_[k + 1];
    double ip = 0.0, in = 0.0;
    for (Eigen::Index j = 0; j < rule.nodes.size(); ++j) {
      const double u = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes(j);
      const double wt = 0.5 * (b - a) * rule.weights(j) * inv * std::pow(u, inv - 1.0);
      const double y = std::pow(u, inv);
      const double fp = f_(y), fn = f_(-y);
      const double s = c * inv * upper_incomplete_gamma(inv, u);
      ip += wt * fp;
      in += wt * fn;
      fs_pos += wt * fp * s;
      fs_neg += wt * fn * s;
      // c_m = (2m + 1)/2 sum_j w_j P_m(t_j) y_j with y the integrand in u
      const double t = rule.nodes(j);
      const double base = 0.5 * rule.weights(j) * inv * std::pow(u, inv - 1.0);
      double pm1 = 0.0, pm = 1.0;
      for (Eigen::Index mdeg = 0; mdeg < nq; ++mdeg) {
        const double scale = (2.0 * mdeg + 1.0) * base * pm;
        leg_pos_[k * static_cast<std::size_t>(nq) + static_cast<std::size_t>(mdeg)] += scale * fp;
        leg_neg_[k * static_cast<std::size_t>(nq) + static_cast<std::size_t>(mdeg)] += scale * fn;
        const double next = ((2.0 * mdeg + 1.0) * t * pm - mdeg * pm1) / (mdeg + 1.0);
        pm1 = pm;
        pm = next;
      }
    }
    cum_pos_[k + 1] = cum_pos_[k] + ip;
    cum_neg_[k + 1] = cum_neg_[k] + in;
  }
  f0_ = fs_neg - fs_pos;
}

double FPrimitive::running(double sign, double u) const {
  const double inv = 1.0 / f_.delta();
  const auto& cum = sign > 0.0 ? cum_pos_ : cum_neg_;
  auto integrand = [&](double v) { return v > 0.0 ? f_(sign * std::pow(v, inv)) * inv * std::pow(v, inv - 1.0) : 0.0; };
  if (u >= edges_.back()) {
    QuadOptions opt = quad_opts(1e-12);
    opt.rel_tol = 1e-11;
    return cum.back() + integrate<double>(integrand, edges_.back(), u, opt).value;
  }
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), u);
  const std::size_t k = static_cast<std::size_t>(it - edges_.begin()) - 1;
  const double a = edges_[k], b = edges_[k + 1];
  if (u == a) return cum[k];
  // int_{-1}^{t} P_0 = t + 1, int_{-1}^{t} P_m = (P_{m+1}(t) - P_{m-1}(t)) / (2m + 1)
  const auto& leg = sign > 0.0 ? leg_pos_ : leg_neg_;
  const std::size_t nq = leg.size() / (edges_.size() - 1);
  const double t = (2.0 * u - a - b) / (b - a);
  double pm1 = 1.0, pm = t;  // P_{m-1}, P_m
  double s = leg[k * nq] * (t + 1.0);
  for (std::size_t mdeg = 1; mdeg < nq; ++mdeg) {
    const double pp1 = ((2.0 * mdeg + 1.0) * t * pm - mdeg * pm1) / (mdeg + 1.0);
    s += leg[k * nq + mdeg] * (pp1 - pm1) / (2.0 * mdeg + 1.0);
    pm1 = pm;
    pm = pp1;
  }
  return cum[k] + 0.5 * (b - a) * s;
}

double FPrimitive::operator()(double x) const {
  if (x == 0.0) return f0_;
  const double u = std::pow(std::abs(x), f_.delta());
  return x > 0.0 ? f0_ + running(1.0, u) : f0_ - running(-1.0, u);
}

double FPrimitive::centering() const {
  return mu_delta_integral([this](double x) { return (*this)(x); }, f_.delta(), -kInf, kInf, 1e-9);
}

double FPrimitive::lr_norm(double r) const {
  check_lr_exponent(r, f_.p());
  const double v = mu_delta_integral([&](double x) { return std::pow(std::abs((*this)(x)), r); }, f_.delta(), -kInf,
                                     kInf, 1e-9);
  return std::pow(v, 1.0 / r);
}

FDelta f_delta(std::function<double(double)> g, double delta, double p) { return FDelta(std::move(g), delta, p); }
FPrimitive F_delta(std::function<double(double)> g, double delta, double p) {
  return FPrimitive(std::move(g), delta, p);
}

SteinSolution solve_stein_equation(const TestFunction& h, const Vec& x, const Mat& sigma, std::size_t mc_budget,
                                   std::uint64_t seed, std::uint64_t substream) {
  const int d = static_cast<int>(x.size());
  if (h.d != d || sigma.rows() != d || sigma.cols() != d)
    throw std::invalid_argument("solve_stein_equation: dimension mismatch");
  if (!h.has_gradient()) throw std::invalid_argument("solve_stein_equation: needs an analytic gradient");
  if (!std::isfinite(h.lipschitz)) throw std::invalid_argument("solve_stein_equation: h needs a certified Lipschitz bound");
  Eigen::LLT<Mat> llt(sigma);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("solve_stein_equation: Sigma must be SPD");
  const Mat chol = llt.matrixL();
  SteinSolution out;
  // |P_t h(x) - E h| <= Lip (e^{-t} |x| + e^{-2t} E|Y|), integrated beyond T_max
  out.tail_bound = h.lipschitz * (std::exp(-kSteinTmax) * x.norm() +
                                  0.5 * std::exp(-2.0 * kSteinTmax) * std::sqrt(sigma.trace()));
  if (out.tail_bound > 1e-8) throw std::runtime_error("solve_stein_equation: time integral tail above 1e-8");
  const GaussRule rule = gauss_legendre(64, 0.0, M_PI / 2.0);
  auto m = mc_moments(mc_budget, seed, substream, d + 1, [&](Rng& rng) -> Vec {
    Vec z(d);
    for (int i = 0; i < d; ++i) z(i) = rng.normal();
    const Vec y = chol * z;
    const double hy = 0.5 * (h(y) + h(-y));
    Vec s = Vec::Zero(d + 1);
    for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
      const double th = rule.nodes(k);
      const double cs = std::cos(th), sn = std::sin(th);
      const Vec a = x * cs;
      s(0) += rule.weights(k) * (0.5 * (h(a + sn * y) + h(a - sn * y)) - hy) * (sn / cs);
      s.tail(d) += rule.weights(k) * sn * 0.5 * (h.gradient(a + sn * y) + h.gradient(a - sn * y));
    }
    return -s;
  });
  out.value = m.mean(0);
  out.value_std_error = m.std_error(0);
  out.gradient = m.mean.tail(d);
  out.gradient_cov = m.cov.bottomRightCorner(d, d) / static_cast<double>(m.n);
  out.gradient_std_error = out.gradient_cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

std::vector<SteinFactorRow> stein_factor_suite(const std::vector<TestFunction>& dictionary, const Mat& sigma,
                                               const Mat& points, std::size_t mc_budget, std::uint64_t seed) {
  const int d = static_cast<int>(sigma.rows());
  if (points.cols() != d) throw std::invalid_argument("stein_factor_suite: points must have d columns");
  const double hs_bound = op_norm_inv_sqrt(sigma);
  std::vector<SteinFactorRow> rows;
  std::uint64_t stream = 0;
  for (const auto& h : dictionary) {
    SteinFactorRow row;
    row.name = h.name;
    row.hs_bound = hs_bound;
    row.op_bound = h.hessian_bound <= 1.0 ? 0.5 : kInf;
    row.pass = true;
    for (Eigen::Index p = 0; p < points.rows(); ++p) {
      const Vec x = points.row(p).transpose();
      const MatrixEstimate hess = gaussian_hessian_bismut(h, x, sigma, mc_budget, seed, 2 * stream);
      const SteinSolution sol = solve_stein_equation(h, x, sigma, mc_budget, seed, 2 * stream + 1);
      ++stream;
      const double hs = hess.value.norm();
      if (hs >= row.max_hs) {
        row.max_hs = hs;
        row.hs_std_error = hess.hs_std_error;
      }
      row.pass = row.pass && hs <= hs_bound + 4.0 * hess.hs_std_error;
      Eigen::JacobiSVD<Mat> svd(hess.value, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const double op = svd.singularValues()(0);
      const Mat w = svd.matrixU().col(0) * svd.matrixV().col(0).transpose();
      const Vec wv = Eigen::Map<const Vec>(w.data(), d * d);
      const double op_se = std::sqrt(std::max(0.0, wv.dot(hess.entry_cov * wv)));
      if (op >= row.max_op) {
        row.max_op = op;
        row.op_std_error = op_se;
      }
      row.pass = row.pass && op <= row.op_bound + 4.0 * op_se;
      const double gn = sol.gradient.norm();
      const Vec dir = gn > 0.0 ? Vec(sol.gradient / gn) : Vec(Vec::Zero(d));
      const double g_se = std::sqrt(std::max(0.0, dir.dot(sol.gradient_cov * dir)));
      if (gn >= row.max_grad) {
        row.max_grad = gn;
        row.grad_std_error = g_se;
      }
      row.pass = row.pass && gn <= 1.0 + 4.0 * g_se;
    }
    rows.push_back(row);
  }
  return rows;
}

ScalarEstimate expected_gaussian_norm(const Mat& a, std::size_t mc_budget, std::uint64_t seed) {
  const int d = static_cast<int>(a.cols());
  auto m = mc_moments(mc_budget, seed, 0, 1, [&](Rng& rng) {
    Vec z(d);
    for (int i = 0; i < d; ++i) z(i) = rng.normal();
    return Vec::Constant(1, (a * z).norm());
  });
  return {m.mean(0), m.std_error(0)};
}

}  // namespace steinlab

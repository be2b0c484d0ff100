#include "steinlab/inequalities.hpp"

#include "steinlab/parallel.hpp"
#include "steinlab/quadrature.hpp"
#include "steinlab/special.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace steinlab {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string tag(const std::string& op, const std::string& fname, const std::string& extra) {
  std::ostringstream os;
  os << op << ":" << fname;
  if (!extra.empty()) os << ":" << extra;
  return os.str();
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// rows are draws
McMoments moments_of(const Mat& stats) {
  McMoments m;
  m.n = static_cast<std::size_t>(stats.rows());
  m.mean = stats.colwise().mean().transpose();
  const Mat c = stats.rowwise() - m.mean.transpose();
  m.cov = m.n > 1 ? Mat(c.transpose() * c / static_cast<double>(m.n - 1)) : Mat::Zero(stats.cols(), stats.cols());
  return m;
}

// d/dA A^{1/p}, zero at A = 0
double root_slope(double a, double p) { return a > 0.0 ? std::pow(a, 1.0 / p - 1.0) / p : 0.0; }
double root(double a, double p) { return a > 0.0 ? std::pow(a, 1.0 / p) : 0.0; }

Mat sqrt_spd(const Mat& sigma) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < 0.0)
    throw std::invalid_argument("sigma must be symmetric positive semi-definite");
  return es.operatorSqrt();
}

void check_sigma(const Mat& sigma, int d, const char* who) {
  if (sigma.rows() != d || sigma.cols() != d)
    throw std::invalid_argument(std::string(who) + ": sigma has the wrong shape");
}

void need_gradient(const TestFunction& f, const char* who) {
  if (!f.has_gradient()) throw std::invalid_argument(std::string(who) + ": test function needs a gradient");
}

// (lo, hi) support of a 1D bump, nullopt otherwise
std::optional<std::pair<double, double>> bump_support(const TestFunction& f) {
  if (f.kind != TestFunctionKind::SmoothBump || f.d != 1) return std::nullopt;
  return std::make_pair(f.center(0) - f.width, f.center(0) + f.width);
}

// int over R of h(u) |u|^{-1-alpha} where h(u) = O(u^2) at 0. Segments touching 0
// use u = b v^{1/(2-alpha)}, which makes the integrand bounded at v = 0. Beyond the
// outermost breakpoint h is the constant `tail_value` when `tail_exact` holds.
template <typename H>
double levy_integral(H&& h, double alpha, std::vector<double> breaks, bool tail_exact, double tail_value,
                     double tol) {
  breaks.push_back(0.0);
  breaks.push_back(-1.0);
  breaks.push_back(1.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  QuadOptions opt;
  opt.abs_tol = tol;
  opt.rel_tol = 1e-10;
  opt.max_subdivisions = 20000;
  const double m = 1.0 / (2.0 - alpha);
  auto kernel = [&](double u) { return h(u) * std::pow(std::abs(u), -1.0 - alpha); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    if (b == 0.0 || a == 0.0) {
      const double e = (b == 0.0) ? a : b;  // far end, u = e v^m
      auto g = [&](double v) {
        if (v <= 0.0) return 0.0;
        const double u = e * std::pow(v, m);
        return kernel(u) * std::abs(e) * m * std::pow(v, m - 1.0);
      };
      total += integrate<double>(g, 0.0, 1.0, opt).value;
    } else {
      total += integrate<double>(kernel, a, b, opt).value;
    }
  }
  const double lo = breaks.front(), hi = breaks.back();
  if (tail_exact) {
    total += tail_value * (std::pow(-lo, -alpha) + std::pow(hi, -alpha)) / alpha;
  } else {
    total += integrate<double>(kernel, -kInf, lo, opt).value;
    total += integrate<double>(kernel, hi, kInf, opt).value;
  }
  return total;
}

MeasureSpec standard_stable_1d(double alpha) { return MeasureSpec::stable(alpha, SpectralMeasure::standard_1d()); }

struct CentredNorms {
  double lhs, rhs, se;
};

}  // namespace

bool report_passes(const InequalityReport& r) {
  if (!std::isfinite(r.lhs) || !std::isfinite(r.rhs) || !std::isfinite(r.std_error)) return false;
  if (r.equality) return std::abs(r.rhs - r.lhs) <= 4.0 * r.std_error;
  return r.lhs <= r.rhs + 4.0 * r.std_error;
}

InequalityReport make_report(std::string name, double lhs, double rhs, double std_error, bool equality) {
  InequalityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.std_error = std_error;
  r.equality = equality;
  r.pass = report_passes(r);
  return r;
}

InequalityReport verify_cov_representation_gaussian(const TestFunction& f, const TestFunction& g,
                                                    const Mat& sigma, int z_nodes, std::size_t mc_budget,
                                                    std::uint64_t seed) {
  need_gradient(f, "verify_cov_representation_gaussian");
  need_gradient(g, "verify_cov_representation_gaussian");
  if (f.d != g.d) throw std::invalid_argument("verify_cov_representation_gaussian: dimension mismatch");
  check_sigma(sigma, f.d, "verify_cov_representation_gaussian");
  if (z_nodes < 1) throw std::invalid_argument("verify_cov_representation_gaussian: z_nodes must be positive");
  const MeasureSpec spec = MeasureSpec::gaussian(sigma);

  const Mat x = sample(spec, mc_budget, seed, 0).data;
  Vec fv(x.rows()), gv(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vec xi = x.row(i).transpose();
    fv(i) = f(xi);
    gv(i) = g(xi);
  }
  // same-sample centering
  const Vec prod = (fv.array() - fv.mean()) * (gv.array() - gv.mean());
  const McMoments lm = moments_of(prod);
  const double lhs = lm.mean(0);
  const double lhs_se = lm.std_error(0);

  const GaussRule rule = gauss_legendre(z_nodes, 0.0, 1.0);
  std::vector<double> node_mean(z_nodes), node_var(z_nodes);
  parallel_for(static_cast<std::size_t>(z_nodes), [&](std::size_t k) {
    const auto [xz, yz] = sample_interpolation_pair(spec, rule.nodes(k), mc_budget, seed, 1 + k);
    Vec s(xz.data.rows());
    for (Eigen::Index i = 0; i < s.size(); ++i)
      s(i) = (sigma * f.gradient(xz.data.row(i).transpose())).dot(g.gradient(yz.data.row(i).transpose()));
    const McMoments m = moments_of(s);
    node_mean[k] = m.mean(0);
    node_var[k] = m.std_error(0) * m.std_error(0);
  });
  double rhs = 0.0, rhs_var = 0.0;
  for (int k = 0; k < z_nodes; ++k) {
    rhs += rule.weights(k) * node_mean[k];
    rhs_var += rule.weights(k) * rule.weights(k) * node_var[k];
  }
  return make_report(tag("cov_representation_gaussian", f.name, g.name), lhs, rhs,
                     std::sqrt(lhs_se * lhs_se + rhs_var), true);
}

double stable_jump_pairing_1d(const TestFunction& f, double x, const TestFunction& g, double y, double alpha,
                              double quad_tol, double levy_scale) {
  if (f.d != 1 || g.d != 1) throw std::invalid_argument("stable_jump_pairing_1d: one-dimensional test functions");
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("stable_jump_pairing_1d: alpha must lie in (0, 2)");
  const double fx = f.at(x), gy = g.at(y);
  std::vector<double> breaks;
  const auto sf = bump_support(f), sg = bump_support(g);
  if (sf) {
    breaks.push_back(sf->first - x);
    breaks.push_back(sf->second - x);
  }
  if (sg) {
    breaks.push_back(sg->first - y);
    breaks.push_back(sg->second - y);
  }
  // below |u| = cut the difference quotient is mostly rounding; use the Taylor polynomial
  auto taylor = [](const TestFunction& t, double at) {
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(1, at);
    const double d1 = t.has_gradient() ? t.gradient(p)(0) : std::nan("");
    const double d2 = t.has_hessian() ? t.hessian(p)(0, 0) : 0.0;
    return std::make_pair(d1, d2);
  };
  const auto [f1, f2] = taylor(f, x);
  const auto [g1, g2] = taylor(g, y);
  const bool smooth = std::isfinite(f1) && std::isfinite(g1);
  const double cut = (f.has_hessian() && g.has_hessian()) ? 1e-5 : 1e-7;
  auto h = [&](double u) {
    if (smooth && std::abs(u) < cut) return (f1 * u + 0.5 * f2 * u * u) * (g1 * u + 0.5 * g2 * u * u);
    return (f.at(x + u) - fx) * (g.at(y + u) - gy);
  };
  const bool exact = sf && sg;
  return levy_scale * stable_levy_constant(alpha) * levy_integral(h, alpha, breaks, exact, fx * gy, quad_tol);
}

double stable_gradient_length_1d(const TestFunction& f, double x, double alpha, double quad_tol, double levy_scale) {
  return std::sqrt(std::max(0.0, stable_jump_pairing_1d(f, x, f, x, alpha, quad_tol, levy_scale)));
}

InequalityReport verify_cov_representation_stable_1d(const TestFunction& f, const TestFunction& g, double alpha,
                                                     int z_nodes, std::size_t mc_budget, double quad_tol,
                                                     std::uint64_t seed) {
  if (f.d != 1 || g.d != 1)
    throw std::invalid_argument("verify_cov_representation_stable_1d: one-dimensional test functions");
  if (!(alpha > 1.0 && alpha < 2.0))
    throw std::invalid_argument("verify_cov_representation_stable_1d: alpha must lie in (1, 2)");
  if (z_nodes < 1) throw std::invalid_argument("verify_cov_representation_stable_1d: z_nodes must be positive");
  const MeasureSpec spec = standard_stable_1d(alpha);

  const Mat x = sample(spec, mc_budget, seed, 0).data;
  Vec fv(x.rows()), gv(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    fv(i) = f.at(x(i, 0));
    gv(i) = g.at(x(i, 0));
  }
  const Vec prod = (fv.array() - fv.mean()) * (gv.array() - gv.mean());
  const McMoments lm = moments_of(prod);

  const GaussRule rule = gauss_legendre(z_nodes, 0.0, 1.0);
  std::vector<double> node_mean(z_nodes), node_var(z_nodes);
  parallel_for(static_cast<std::size_t>(z_nodes), [&](std::size_t k) {
    const auto [xz, yz] = sample_interpolation_pair(spec, rule.nodes(k), mc_budget, seed, 1 + k);
    Vec s(xz.data.rows());
    for (Eigen::Index i = 0; i < s.size(); ++i)
      s(i) = stable_jump_pairing_1d(f, xz.data(i, 0), g, yz.data(i, 0), alpha, quad_tol);
    const McMoments m = moments_of(s);
    node_mean[k] = m.mean(0);
    node_var[k] = m.std_error(0) * m.std_error(0);
  });
  double rhs = 0.0, rhs_var = 0.0;
  for (int k = 0; k < z_nodes; ++k) {
    rhs += rule.weights(k) * node_mean[k];
    rhs_var += rule.weights(k) * rule.weights(k) * node_var[k];
  }
  const double se = std::sqrt(lm.std_error(0) * lm.std_error(0) + rhs_var);
  return make_report(tag("cov_representation_stable", f.name, g.name + ":alpha=" + num(alpha)), lm.mean(0), rhs, se,
                     true);
}

namespace {

// lhs = ||f - mean||_p and rhs = c * (E ||A grad f||^p)^{1/p} on one batch
CentredNorms centred_vs_gradient(const TestFunction& f, const Mat& x, const Mat& a, double p, double c) {
  Vec fv(x.rows());
  Vec gn(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vec xi = x.row(i).transpose();
    fv(i) = f(xi);
    gn(i) = (a * f.gradient(xi)).norm();
  }
  const double m = fv.mean();
  Mat stats(x.rows(), 2);
  stats.col(0) = (fv.array() - m).abs().pow(p).matrix();
  stats.col(1) = gn.array().pow(p).matrix();
  const McMoments mm = moments_of(stats);
  const double A = mm.mean(0), B = mm.mean(1);
  Vec w(2);
  w << -root_slope(A, p), c * root_slope(B, p);
  return {root(A, p), c * root(B, p), mm.std_error(w)};
}

}  // namespace

InequalityReport lp_poincare_gaussian(const TestFunction& f, double p, const Mat& sigma, std::size_t mc_budget,
                                      std::uint64_t seed) {
  if (!(p >= 2.0)) throw std::invalid_argument("lp_poincare_gaussian: p must be >= 2");
  need_gradient(f, "lp_poincare_gaussian");
  check_sigma(sigma, f.d, "lp_poincare_gaussian");
  const Mat x = sample(MeasureSpec::gaussian(sigma), mc_budget, seed, 0).data;
  const auto r = centred_vs_gradient(f, x, sqrt_spd(sigma), p, std::sqrt(p - 1.0));
  return make_report(tag("lp_poincare_gaussian", f.name, "p=" + num(p)), r.lhs, r.rhs, r.se);
}

InequalityReport pisier_check(const TestFunction& f, double p, std::size_t mc_budget, std::uint64_t seed) {
  if (!(p > 1.0)) throw std::invalid_argument("pisier_check: p must exceed 1");
  need_gradient(f, "pisier_check");
  const Mat id = Mat::Identity(f.d, f.d);
  const Mat x = sample(MeasureSpec::gaussian(id), mc_budget, seed, 0).data;
  const double c = 0.5 * M_PI * std::pow(gaussian_abs_moment(p), 1.0 / p);
  const auto r = centred_vs_gradient(f, x, id, p, c);
  return make_report(tag("pisier", f.name, "p=" + num(p)), r.lhs, r.rhs, r.se);
}

RobustMean median_of_means(const Vec& x, int groups) {
  if (groups < 1 || x.size() < groups) throw std::invalid_argument("median_of_means: need at least one draw per group");
  const Eigen::Index size = x.size() / groups;
  std::vector<double> means(groups);
  for (int k = 0; k < groups; ++k) means[k] = x.segment(k * size, size).mean();
  auto median = [](std::vector<double> v) {
    const std::size_t h = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + h, v.end());
    double m = v[h];
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + h));
    return m;
  };
  RobustMean r;
  r.value = median(means);
  std::vector<double> dev(groups);
  for (int k = 0; k < groups; ++k) dev[k] = std::abs(means[k] - r.value);
  r.std_error = 1.2533 * 1.4826 * median(dev) / std::sqrt(static_cast<double>(groups));
  return r;
}

InequalityReport stable_lp_poincare(const TestFunction& f, double p, double p1, double alpha, const MeasureSpec& spec,
                                    std::size_t mc_budget, std::uint64_t seed) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("stable_lp_poincare: alpha must lie in (1, 2)");
  if (spec.kind != MeasureKind::Stable && spec.kind != MeasureKind::StableRotInv)
    throw std::invalid_argument("stable_lp_poincare: needs a stable spec");
  if (spec.alpha != alpha) throw std::invalid_argument("stable_lp_poincare: spec has a different alpha");
  if (!(p1 < alpha))
    throw std::invalid_argument("stable_lp_poincare: moment guard: p1 must be below alpha, E||X||^p1 is infinite");
  if (!(p1 > 1.0)) throw std::invalid_argument("stable_lp_poincare: p1 must exceed 1");
  if (!(p > 1.0 && p < p1)) throw std::invalid_argument("stable_lp_poincare: need 1 < p < p1");
  need_gradient(f, "stable_lp_poincare");
  if (f.d != spec.d) throw std::invalid_argument("stable_lp_poincare: dimension mismatch");
  const double p2 = 1.0 / (1.0 / p - 1.0 / p1);

  const Mat x = sample(spec, mc_budget, seed, 0).data;
  const Mat y = sample(spec, mc_budget, seed, 1).data;
  const RobustMean moment = median_of_means(y.rowwise().norm().array().pow(p1).matrix());
  const double q = q_alpha_integral(alpha);

  Vec fv(x.rows()), gn(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vec xi = x.row(i).transpose();
    fv(i) = f(xi);
    gn(i) = f.gradient(xi).norm();
  }
  Mat stats(x.rows(), 2);
  stats.col(0) = (fv.array() - fv.mean()).abs().pow(p).matrix();
  stats.col(1) = gn.array().pow(p2).matrix();
  const McMoments mm = moments_of(stats);
  const double A = mm.mean(0), G = mm.mean(1);
  const double mx = root(moment.value, p1);
  const double lhs = root(A, p);
  const double rhs = q * mx * root(G, p2);
  Vec w(2);
  w << -root_slope(A, p), q * mx * root_slope(G, p2);
  const double se_f = mm.std_error(w);
  const double se_m = q * root(G, p2) * root_slope(moment.value, p1) * moment.std_error;
  return make_report(tag("stable_lp_poincare", f.name, "p=" + num(p) + ":p1=" + num(p1) + ":alpha=" + num(alpha)),
                     lhs, rhs, std::sqrt(se_f * se_f + se_m * se_m));
}

double sobolev_time_integral(double lambda, double tol) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("sobolev_time_integral: lambda must be >= 0");
  auto h = [lambda](double t) { return std::exp(-(lambda + 1.0) * t) / std::sqrt(-std::expm1(-2.0 * t)); };
  QuadOptions opt;
  opt.abs_tol = tol;
  opt.max_subdivisions = 20000;
  return integrate<double>(h, 0.0, 1.0, opt).value + integrate<double>(h, 1.0, kInf, opt).value;
}

double sobolev_constant(double lambda, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("sobolev_constant: p must exceed 1");
  const double q = p / (p - 1.0);
  return std::pow(gaussian_abs_moment(q), 1.0 / q) * sobolev_time_integral(lambda);
}

InequalityReport sobolev_type_check(const HermiteCombination& f, double p, double lambda, std::size_t mc_budget,
                                    std::uint64_t seed) {
  if (!(p >= 2.0)) throw std::invalid_argument("sobolev_type_check: p must be >= 2");
  if (!(lambda >= 0.0)) throw std::invalid_argument("sobolev_type_check: lambda must be >= 0");
  if (f.empty()) throw std::invalid_argument("sobolev_type_check: empty combination");
  const int d = static_cast<int>(f.front().k.size());
  std::string label;
  for (const auto& t : f) {
    if (static_cast<int>(t.k.size()) != d) throw std::invalid_argument("sobolev_type_check: mixed dimensions");
    int deg = 0;
    for (int k : t.k) deg += k;
    if (deg == 0) throw std::invalid_argument("sobolev_type_check: constant term, f is not centered");
    std::ostringstream os;
    os << (label.empty() ? "" : "+") << num(t.coef) << "H";
    for (int k : t.k) os << k;
    label += os.str();
  }
  const Mat x = sample(MeasureSpec::gaussian(Mat::Identity(d, d)), mc_budget, seed, 0).data;
  Mat stats(x.rows(), 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vec xi = x.row(i).transpose();
    double v = 0.0, lv = 0.0;
    for (const auto& t : f) {
      const HermiteEval h = hermite_eval(t.k, xi);
      v += t.coef * h.value;
      lv += t.coef * h.eigenvalue * h.value;
    }
    stats(i, 0) = std::pow(std::abs(v), p);
    stats(i, 1) = std::pow(std::abs(lv), p);
  }
  const McMoments mm = moments_of(stats);
  const double c = std::sqrt(p - 1.0) * sobolev_constant(lambda, p);
  const double A = mm.mean(0), B = mm.mean(1);
  const double lhs = root(A, p);
  const double rhs = c * (lambda * root(A, p) + root(B, p));
  Vec w(2);
  w << (c * lambda - 1.0) * root_slope(A, p), c * root_slope(B, p);
  return make_report(tag("sobolev_type", label, "p=" + num(p) + ":lambda=" + num(lambda)), lhs, rhs,
                     mm.std_error(w));
}

std::string to_string(CovFamily family) {
  switch (family) {
    case CovFamily::Gaussian: return "gaussian";
    case CovFamily::Laguerre: return "laguerre";
    case CovFamily::Jacobi: return "jacobi";
    case CovFamily::LogConcave: return "logconcave";
    case CovFamily::StableNonlocal: return "stable_nonlocal";
  }
  return "unknown";
}

CovFamily cov_family_from_string(const std::string& name) {
  for (CovFamily f : {CovFamily::Gaussian, CovFamily::Laguerre, CovFamily::Jacobi, CovFamily::LogConcave,
                      CovFamily::StableNonlocal})
    if (to_string(f) == name) return f;
  throw std::invalid_argument("unknown covariance family: " + name);
}

InequalityReport asymmetric_cov_suite(CovFamily family, const MeasureSpec& spec, const TestFunction& f,
                                      const TestFunction& g, double p, std::size_t mc_budget, std::uint64_t seed,
                                      std::optional<double> jacobi_kappa, double quad_tol) {
  if (!(p > 1.0)) throw std::invalid_argument("asymmetric_cov_suite: p must exceed 1");
  if (f.d != spec.d || g.d != spec.d) throw std::invalid_argument("asymmetric_cov_suite: dimension mismatch");
  const double q = p / (p - 1.0);
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("asymmetric_cov_suite (" + to_string(family) + "): " + what);
  };
  double constant = 1.0;
  std::function<double(const TestFunction&, const Vec&)> grad_len;
  switch (family) {
    case CovFamily::Gaussian: {
      require(spec.kind == MeasureKind::Gaussian, "needs a Gaussian spec");
      const Mat s = sqrt_spd(spec.sigma);
      grad_len = [s](const TestFunction& h, const Vec& x) { return (s * h.gradient(x)).norm(); };
      break;
    }
    case CovFamily::Laguerre:
      require(spec.kind == MeasureKind::Gamma, "needs a gamma spec");
      constant = 2.0;
      grad_len = [](const TestFunction& h, const Vec& x) { return std::sqrt(x(0)) * std::abs(h.gradient(x)(0)); };
      break;
    case CovFamily::Jacobi:
      require(spec.kind == MeasureKind::Beta, "needs a beta spec");
      require(jacobi_kappa.has_value(), "the curvature constant jacobi_kappa must be supplied");
      require(*jacobi_kappa > 0.0, "jacobi_kappa must be positive");
      constant = 1.0 / *jacobi_kappa;
      grad_len = [](const TestFunction& h, const Vec& x) {
        return std::sqrt(std::max(0.0, 1.0 - x(0) * x(0))) * std::abs(h.gradient(x)(0));
      };
      break;
    case CovFamily::LogConcave: {
      require(spec.kind == MeasureKind::LogConcave, "needs a log-concave spec");
      Eigen::SelfAdjointEigenSolver<Mat> es(spec.sigma);
      constant = es.eigenvalues().maxCoeff() / spec.kappa;
      grad_len = [](const TestFunction& h, const Vec& x) { return h.gradient(x).norm(); };
      break;
    }
    case CovFamily::StableNonlocal: {
      require(spec.kind == MeasureKind::Stable && spec.d == 1, "needs a one-dimensional stable spec");
      double total = 0.0;
      for (const auto& a : spec.spectral.atoms) total += a.weight;
      const double scale = 2.0 * total;  // relative to exp(-|xi|^alpha / 2)
      const double alpha = spec.alpha;
      grad_len = [=](const TestFunction& h, const Vec& x) {
        return stable_gradient_length_1d(h, x(0), alpha, quad_tol, scale);
      };
      break;
    }
  }
  if (family != CovFamily::StableNonlocal) {
    need_gradient(f, "asymmetric_cov_suite");
    need_gradient(g, "asymmetric_cov_suite");
  }

  const Mat x = sample(spec, mc_budget, seed, 0).data;
  Mat stats(x.rows(), 5);
  parallel_for(static_cast<std::size_t>(x.rows()), [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    const Vec xi = x.row(r).transpose();
    const double fv = f(xi), gv = g(xi);
    stats(r, 0) = fv;
    stats(r, 1) = gv;
    stats(r, 2) = fv * gv;
    stats(r, 3) = std::pow(grad_len(f, xi), p);
    stats(r, 4) = std::pow(grad_len(g, xi), q);
  });
  const McMoments mm = moments_of(stats);
  const double ef = mm.mean(0), eg = mm.mean(1);
  const double cov = mm.mean(2) - ef * eg;
  const double P = mm.mean(3), Q = mm.mean(4);
  const double lhs = std::abs(cov);
  const double rhs = constant * root(P, p) * root(Q, q);
  const double sg = cov >= 0.0 ? 1.0 : -1.0;
  Vec w(5);
  w << sg * eg, sg * ef, -sg, constant * root_slope(P, p) * root(Q, q), constant * root(P, p) * root_slope(Q, q);
  return make_report(tag("asymmetric_cov_" + to_string(family), f.name, g.name + ":p=" + num(p)), lhs, rhs,
                     mm.std_error(w));
}

PoincareEstimate poincare_rayleigh(const MeasureSpec& spec, const Mat& sigma,
                                   const std::vector<VectorTestFunction>& dictionary, std::size_t mc_budget,
                                   std::uint64_t seed) {
  if (dictionary.empty()) throw std::invalid_argument("poincare_rayleigh: empty dictionary");
  const int d = spec.d;
  check_sigma(sigma, d, "poincare_rayleigh");
  const Mat x = sample(spec, mc_budget, seed, 0).data;
  PoincareEstimate est;
  est.lower_bound = -kInf;
  for (const auto& v : dictionary) {
    if (v.d != d || !v.jacobian) throw std::invalid_argument("poincare_rayleigh: member " + v.name + " unusable");
    Mat stats(x.rows(), 2 * d + 1);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const Vec xi = x.row(i).transpose();
      const Vec fv = v.value(xi);
      const Mat j = v.jacobian(xi);
      stats.row(i).head(d) = fv.transpose();
      stats.row(i).segment(d, d) = fv.array().square().matrix().transpose();
      stats(i, 2 * d) = (j * sigma * j.transpose()).trace();
    }
    const McMoments mm = moments_of(stats);
    const Vec mean = mm.mean.head(d);
    const double var = (mm.mean.segment(d, d) - mean.array().square().matrix()).sum();
    const double energy = mm.mean(2 * d);
    if (!(energy > 0.0)) throw std::invalid_argument("poincare_rayleigh: member " + v.name + " has zero energy");
    const double ratio = var / energy;
    Vec w(2 * d + 1);
    w.head(d) = -2.0 * mean / energy;
    w.segment(d, d).setConstant(1.0 / energy);
    w(2 * d) = -var / (energy * energy);
    est.quotients.push_back(ratio);
    if (ratio > est.lower_bound) {
      est.lower_bound = ratio;
      est.std_error = mm.std_error(w);
      est.argmax = v.name;
    }
  }
  if (spec.kind == MeasureKind::Gaussian && (spec.sigma - sigma).norm() <= 1e-12 * (1.0 + sigma.norm()))
    est.analytic_upper = 1.0;
  if (spec.kind == MeasureKind::LogConcave && (spec.sigma - sigma).norm() <= 1e-12 * (1.0 + sigma.norm()))
    est.analytic_upper = 1.0 / spec.kappa;
  return est;
}

InequalityReport exp_weighted_vs_nonlocal(const TestFunction& f, double quad_tol) {
  if (f.d != 1) throw std::invalid_argument("exp_weighted_vs_nonlocal: one-dimensional test function");
  need_gradient(f, "exp_weighted_vs_nonlocal");
  QuadOptions opt;
  opt.abs_tol = quad_tol;
  opt.rel_tol = quad_tol;
  opt.max_subdivisions = 20000;
  double inner_err = 0.0;
  auto inner = [&](double x) {
    const double fx = f.at(x);
    auto h = [&](double u) {
      const double du = f.at(x + u) - fx;
      return du * du * std::exp(-u) / u;
    };
    const auto r = integrate<double>(h, 0.0, kInf, opt);
    inner_err = std::max(inner_err, r.abs_error_estimate);
    return r.value * std::exp(-x);
  };
  const auto lhs = integrate<double>(inner, 0.0, kInf, opt);
  auto w = [&](double x) {
    const double d = f.derivative_at(x);
    return x * d * d * std::exp(-x);
  };
  const auto rhs = integrate<double>(w, 0.0, kInf, opt);
  return make_report(tag("exp_weighted_vs_nonlocal", f.name, ""), lhs.value, rhs.value,
                     lhs.abs_error_estimate + inner_err + rhs.abs_error_estimate);
}

}  // namespace steinlab

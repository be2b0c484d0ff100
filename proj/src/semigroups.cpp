#include "steinlab/semigroups.hpp"

#include "steinlab/parallel.hpp"
#include "steinlab/quadrature.hpp"
#include "steinlab/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace steinlab {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
constexpr double kInf = std::numeric_limits<double>::infinity();

double stable_scale(double alpha, double t) { return std::pow(-std::expm1(-alpha * t), 1.0 / alpha); }
double gauss_scale(double t) { return std::sqrt(-std::expm1(-2.0 * t)); }

bool is_stable(const MeasureSpec& s) {
  return s.kind == MeasureKind::Stable || s.kind == MeasureKind::StableRotInv;
}

double semigroup_scale(const MeasureSpec& spec, double t) {
  if (spec.kind == MeasureKind::Gaussian) return gauss_scale(t);
  if (is_stable(spec)) return stable_scale(spec.alpha, t);
  throw std::invalid_argument("semigroup: spec must be gaussian or stable");
}

SemigroupValue mehler_mc(const TestFunction& f, const SemigroupQuery& q) {
  if (!(q.t >= 0.0)) throw std::invalid_argument("semigroup: t must be non-negative");
  if (q.mc_budget < 1) throw std::invalid_argument("semigroup: mc_budget must be positive");
  if (q.x.size() != q.spec.d || f.d != q.spec.d) throw std::invalid_argument("semigroup: dimension mismatch");
  SemigroupValue out;
  out.closed_form = semigroup_closed_form(f, q.spec, q.t, q.x);
  if (q.t == 0.0) {
    out.value = f(q.x);
    return out;
  }
  const double c = semigroup_scale(q.spec, q.t);
  const Vec a = q.x * std::exp(-q.t);
  const MeasureSpec& spec = q.spec;
  auto m = mc_moments(q.mc_budget, q.seed, q.substream, 1, [&](Rng& rng) {
    const Vec y = draw(spec, rng);
    return Vec::Constant(1, f(a + c * y));
  });
  out.value = m.mean(0);
  out.std_error = m.std_error(0);
  return out;
}

// int_0^inf (cos(theta0 + sgn v) - cos theta0) v^{-alpha} dv
double character_profile_integral(double theta0, double sgn, double alpha) {
  QuadOptions opt;
  opt.abs_tol = 1e-14;
  opt.max_subdivisions = 20000;
  const double ex = 1.0 / (2.0 - alpha);
  // [0, 1] with v = w^{1/(2-alpha)}
  auto near = [&](double w) {
    if (w <= 0.0) return -sgn * std::sin(theta0) * ex;
    const double v = std::pow(w, ex);
    const double diff = -2.0 * std::sin(theta0 + 0.5 * sgn * v) * std::sin(0.5 * sgn * v);
    return diff * ex * std::pow(w, -ex);
  };
  double s = integrate<double>(near, 0.0, 1.0, opt).value;
  // [1, inf): oscillatory part by half-period partial sums and Wynn extrapolation
  auto osc = [&](double v) { return std::cos(theta0 + sgn * v) * std::pow(v, -alpha); };
  std::vector<double> partial;
  double acc = 0.0;
  double lo = 1.0;
  for (int k = 0; k < 40; ++k) {
    const double hi = lo + M_PI;
    acc += integrate<double>(osc, lo, hi, opt).value;
    partial.push_back(acc);
    lo = hi;
  }
  s += wynn_epsilon(partial);
  s -= std::cos(theta0) / (alpha - 1.0);
  return s;
}

// int_0^inf (f(x + r s) - f(x)) r^{-alpha} dr for a general test function
double ray_integral(const TestFunction& f, const Vec& x, const Vec& s, double alpha, double tol) {
  QuadOptions opt;
  opt.abs_tol = tol;
  opt.max_subdivisions = 20000;
  const double fx = f(x);
  const double r0 = 1e-2;
  // Taylor part on [0, r0]
  double g1, g2;
  if (f.has_gradient() && f.has_hessian()) {
    g1 = f.gradient(x).dot(s);
    g2 = s.dot(f.hessian(x) * s);
  } else {
    const double h = 1e-3;
    const double fp = f(x + h * s), fm = f(x - h * s);
    g1 = (fp - fm) / (2.0 * h);
    g2 = (fp - 2.0 * fx + fm) / (h * h);
  }
  double total = g1 * std::pow(r0, 2.0 - alpha) / (2.0 - alpha) + 0.5 * g2 * std::pow(r0, 3.0 - alpha) / (3.0 - alpha);
  auto body = [&](double r) { return (f(x + r * s) - fx) * std::pow(r, -alpha); };
  total += integrate<double>(body, r0, 1.0, opt).value;
  // tail: r = u^{-1/(alpha-1)}, int_1^inf (f(x + r s) - f(x)) r^{-alpha} dr = (1/(alpha-1)) int_0^1 (...) du
  if (f.kind == TestFunctionKind::SmoothBump) {
    // support of r -> f(x + r s) is where |x + r s - c| < w
    const Vec y = x - f.center;
    const double b = y.dot(s);
    const double disc = b * b - (y.squaredNorm() - f.width * f.width);
    total -= fx / (alpha - 1.0);
    if (disc > 0.0) {
      const double r1 = std::max(1.0, -b - std::sqrt(disc));
      const double r2 = -b + std::sqrt(disc);
      if (r2 > r1)
        total += integrate<double>([&](double r) { return f(x + r * s) * std::pow(r, -alpha); }, r1, r2, opt).value;
    }
    return total;
  }
  auto tail = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double r = std::pow(u, -1.0 / (alpha - 1.0));
    return f(x + r * s) - fx;
  };
  total += integrate<double>(tail, 0.0, 1.0, opt).value / (alpha - 1.0);
  return total;
}

}  // namespace

std::optional<double> semigroup_closed_form(const TestFunction& f, const MeasureSpec& spec, double t, const Vec& x) {
  if (f.kind == TestFunctionKind::Constant) return f.amplitude;
  if (spec.kind != MeasureKind::Gaussian && !is_stable(spec)) return std::nullopt;
  const double e = std::exp(-t);
  switch (f.kind) {
    case TestFunctionKind::Character: {
      const double c = semigroup_scale(spec, t);
      const double amp = characteristic_function(spec, c * f.xi).real();
      return std::cos(f.xi.dot(x) * e + f.phase) * amp;
    }
    case TestFunctionKind::Coordinate: return e * x(f.coord);
    case TestFunctionKind::HermiteProduct: {
      if (spec.kind != MeasureKind::Gaussian || !spec.sigma.isIdentity(1e-14)) return std::nullopt;
      const auto h = hermite_eval(f.k, x);
      return std::exp(-h.eigenvalue * t) * h.value;
    }
    default: return std::nullopt;
  }
}

SemigroupValue mehler_gaussian(const TestFunction& f, const SemigroupQuery& q) {
  if (q.spec.kind != MeasureKind::Gaussian) throw std::invalid_argument("mehler_gaussian: spec must be gaussian");
  return mehler_mc(f, q);
}

SemigroupValue mehler_stable(const TestFunction& f, const SemigroupQuery& q) {
  if (!is_stable(q.spec)) throw std::invalid_argument("mehler_stable: spec must be stable");
  return mehler_mc(f, q);
}

double stable_semigroup_quad_1d(const TestFunction& f, double t, double x, const DensityGrid1D& density, double tol) {
  if (t == 0.0) return f.at(x);
  const double c = stable_scale(density.alpha, t);
  const double a = x * std::exp(-t);
  QuadOptions opt;
  opt.abs_tol = tol;
  opt.max_subdivisions = 20000;
  auto integrand = [&](double z) { return f.at(a + c * z) * density.density(z); };
  if (f.kind == TestFunctionKind::SmoothBump) {
    const double lo = (f.center(0) - f.width - a) / c;
    const double hi = (f.center(0) + f.width - a) / c;
    return integrate<double>(integrand, lo, hi, opt).value;
  }
  return integrate<double>(integrand, -kInf, kInf, opt).value;
}

double levy_polar_weight(const SpectralAtom& atom, double alpha) {
  return atom.weight / stable_lambda_per_sigma(alpha);
}

Vec frac_gradient(const TestFunction& f, const Vec& x, const SpectralMeasure& spectral, double alpha, double tol) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("frac_gradient: alpha must lie in (1, 2)");
  if (x.size() != spectral.dim() || f.d != spectral.dim())
    throw std::invalid_argument("frac_gradient: dimension mismatch");
  Vec out = Vec::Zero(x.size());
  for (const auto& atom : spectral.atoms) {
    const double sigma = levy_polar_weight(atom, alpha);
    double integral;
    if (f.kind == TestFunctionKind::Character) {
      const double a = f.xi.dot(atom.direction);
      if (a == 0.0) continue;
      integral = std::pow(std::abs(a), alpha - 1.0) *
                 character_profile_integral(f.xi.dot(x) + f.phase, a > 0.0 ? 1.0 : -1.0, alpha);
    } else {
      integral = ray_integral(f, x, atom.direction, alpha, tol);
    }
    out += sigma * integral * atom.direction;
  }
  return out;
}

Eigen::VectorXcd fractional_multiplier(const Vec& xi, const SpectralMeasure& spectral, double alpha) {
  const double k2 = -std::tgamma(1.0 - alpha) * std::sin(M_PI * (alpha - 1.0) / 2.0);
  Vec s = Vec::Zero(xi.size());
  for (const auto& atom : spectral.atoms) {
    const double a = atom.direction.dot(xi);
    if (a == 0.0) continue;
    s += levy_polar_weight(atom, alpha) * (a > 0.0 ? 1.0 : -1.0) * std::pow(std::abs(a), alpha - 1.0) * atom.direction;
  }
  return std::complex<double>(0.0, k2) * s.cast<std::complex<double>>();
}

Eigen::VectorXcd stable_cf_gradient(const MeasureSpec& spec, const Vec& eta) {
  const double phi = characteristic_function(spec, eta).real();
  Vec g = Vec::Zero(eta.size());
  if (spec.kind == MeasureKind::Stable) {
    for (const auto& atom : spec.spectral.atoms) {
      const double a = atom.direction.dot(eta);
      if (a == 0.0) continue;
      g -= atom.weight * spec.alpha * (a > 0.0 ? 1.0 : -1.0) * std::pow(std::abs(a), spec.alpha - 1.0) * atom.direction;
    }
  } else if (spec.kind == MeasureKind::StableRotInv) {
    const double n = eta.norm();
    if (n > 0.0) g = -0.5 * spec.alpha * std::pow(n, spec.alpha - 2.0) * eta;
  } else {
    throw std::invalid_argument("stable_cf_gradient: spec must be stable");
  }
  return (phi * g).cast<std::complex<double>>();
}

BismutCheck bismut_stable_check(const TestFunction& f, double t, const Vec& x, const MeasureSpec& spec,
                                std::size_t mc_budget, std::uint64_t seed, BismutLhs mode,
                                std::shared_ptr<const DensityGrid1D> density) {
  if (spec.kind != MeasureKind::Stable) throw std::invalid_argument("bismut_stable_check: needs a discrete spectral measure");
  if (!(t > 0.0)) throw std::invalid_argument("bismut_stable_check: t must be positive");
  if (x.size() != spec.d || f.d != spec.d) throw std::invalid_argument("bismut_stable_check: dimension mismatch");
  const double alpha = spec.alpha;
  const double c = stable_scale(alpha, t);
  const double pref = std::exp(-(alpha - 1.0) * t) / std::pow(c, alpha - 1.0);
  const double e = std::exp(-t);
  BismutCheck out;

  if (f.kind == TestFunctionKind::Character) {
    const Vec eta = f.xi * e;
    const double amp = characteristic_function(spec, c * f.xi).real();
    const std::complex<double> rot = std::exp(std::complex<double>(0.0, eta.dot(x) + f.phase));
    if (mode == BismutLhs::Multiplier) {
      out.lhs = (amp * rot * fractional_multiplier(eta, spec.spectral, alpha)).real();
    } else {
      out.lhs = amp * frac_gradient(TestFunction::character(eta, f.phase), x, spec.spectral, alpha, 1e-12);
    }
    const Eigen::VectorXcd ey = std::complex<double>(0.0, -1.0) * stable_cf_gradient(spec, c * f.xi);
    out.rhs = pref * (rot * ey).real();
    out.gap = (out.lhs - out.rhs).norm();
    return out;
  }

  // Monte Carlo right-hand side, antithetic in Y
  const Vec a = x * e;
  auto m = mc_moments(mc_budget, seed, 0, spec.d, [&](Rng& rng) -> Vec {
    const Vec y = draw(spec, rng);
    return 0.5 * y * (f(a + c * y) - f(a - c * y));
  });
  out.rhs = pref * m.mean;
  out.std_error = 0.0;
  for (Eigen::Index i = 0; i < spec.d; ++i) out.std_error = std::max(out.std_error, pref * m.std_error(i));

  if (spec.d != 1) throw std::invalid_argument("bismut_stable_check: non-character functions need d = 1");
  if (!density) density = shared_stable_density(alpha);
  // Y = k Z with Z of characteristic function exp(-|xi|^alpha / 2)
  const double k = std::pow(4.0 * spec.spectral.atoms.front().weight, 1.0 / alpha);
  auto grid = density;
  TestFunction ptf = TestFunction::callback(
      1,
      [f, t, k, grid](const Vec& y) {
        TestFunction g = f;
        if (g.kind == TestFunctionKind::SmoothBump) {
          // rescale so the quadrature runs against the standard density
          g.center = f.center / k;
          g.width = f.width / k;
          const double cen = f.center(0), w = f.width;
          g.value = [cen, w, k, amp = f.amplitude](const Vec& z) {
            const double u = (k * z(0) - cen) * (k * z(0) - cen) / (w * w);
            return u < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - u)) : 0.0;
          };
          return stable_semigroup_quad_1d(g, t, y(0) / k, *grid, 1e-12);
        }
        g.value = [f, k](const Vec& z) { return f(k * z); };
        g.kind = TestFunctionKind::Callback;
        return stable_semigroup_quad_1d(g, t, y(0) / k, *grid, 1e-12);
      },
      {}, {}, "P_t f");
  out.lhs = frac_gradient(ptf, x, spec.spectral, alpha, 1e-9);
  out.gap = (out.lhs - out.rhs).norm();
  return out;
}

SemigroupValue gradient_bismut_stable(const TestFunction& f, double t, double x, const DensityGrid1D& density,
                                      std::size_t mc_budget, std::uint64_t seed) {
  if (!(t > 0.0)) throw std::invalid_argument("gradient_bismut_stable: t must be positive");
  if (f.d != 1) throw std::invalid_argument("gradient_bismut_stable: one-dimensional");
  const double alpha = density.alpha;
  const double c = stable_scale(alpha, t);
  const double e = std::exp(-t);
  const double a = x * e;
  auto m = mc_moments(mc_budget, seed, 0, 1, [&](Rng& rng) {
    const double y = draw_stable_1d(alpha, rng);
    const double ld = density.log_derivative(y);
    return Vec::Constant(1, 0.5 * ld * (f.at(a + c * y) - f.at(a - c * y)));
  });
  SemigroupValue out;
  out.value = -(e / c) * m.mean(0);
  out.std_error = (e / c) * m.std_error(0);
  if (f.kind == TestFunctionKind::Character) {
    const double amp = std::exp(-0.5 * std::pow(std::abs(c * f.xi(0)), alpha));
    out.closed_form = -amp * f.xi(0) * e * std::sin(f.xi(0) * a + f.phase);
  }
  return out;
}

MatrixEstimate gaussian_hessian_bismut(const TestFunction& h, const Vec& x, const Mat& sigma, std::size_t mc_budget,
                                       std::uint64_t seed, std::uint64_t substream) {
  if (!h.has_gradient()) throw std::invalid_argument("gaussian_hessian_bismut: needs an analytic gradient");
  const int d = static_cast<int>(x.size());
  if (sigma.rows() != d || h.d != d) throw std::invalid_argument("gaussian_hessian_bismut: dimension mismatch");
  Eigen::LLT<Mat> llt(sigma);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("gaussian_hessian_bismut: Sigma must be SPD");
  const Mat chol = llt.matrixL();
  const Mat sinv = llt.solve(Mat::Identity(d, d));
  const GaussRule rule = gauss_legendre(64, 0.0, M_PI / 2.0);
  auto m = mc_moments(mc_budget, seed, substream, d * d, [&](Rng& rng) -> Vec {
    Vec z(d);
    for (int i = 0; i < d; ++i) z(i) = rng.normal();
    const Vec y = chol * z;
    const Vec sy = sinv * y;
    Vec acc = Vec::Zero(d);
    for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
      const double th = rule.nodes(k);
      const double cs = std::cos(th), sn = std::sin(th);
      acc += rule.weights(k) * cs * 0.5 * (h.gradient(x * cs + sn * y) - h.gradient(x * cs - sn * y));
    }
    const Mat outer = -sy * acc.transpose();
    return Eigen::Map<const Vec>(outer.data(), d * d);
  });
  MatrixEstimate out;
  out.value = Eigen::Map<const Mat>(m.mean.data(), d, d);
  out.std_error.resize(d, d);
  for (int i = 0; i < d * d; ++i) out.std_error.data()[i] = m.std_error(i);
  out.entry_cov = m.cov / static_cast<double>(m.n);
  const double hs = out.value.norm();
  out.hs_std_error = hs > 0.0 ? m.std_error(Vec(m.mean / hs)) : std::sqrt(m.cov.trace() / static_cast<double>(m.n));
  return out;
}

GammaTransformResult gamma_transform(const MeasureSpec& spec, double r, double lambda, const TestFunction& f,
                                     const Vec& x) {
  if (!(r > 0.0)) throw std::invalid_argument("gamma_transform: r must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("gamma_transform: lambda must be non-negative");
  auto pt = [&](double t) {
    auto v = semigroup_closed_form(f, spec, t, x);
    if (!v) throw std::invalid_argument("gamma_transform: no closed-form semigroup for this function");
    return *v;
  };
  GammaTransformResult out;
  if (lambda == 0.0) {
    const double mean = pt(800.0);
    if (std::abs(mean) > 1e-12) {
      out.diverged = true;
      out.value = std::copysign(kInf, mean);
      return out;
    }
  }
  // t = v^{2/r} absorbs t^{r/2 - 1}
  const double ex = 2.0 / r;
  auto integrand = [&](double v) {
    if (v <= 0.0) return ex * pt(0.0);
    const double t = std::pow(v, ex);
    if (t > 745.0) return 0.0;
    return ex * std::exp(-lambda * t) * pt(t);
  };
  QuadOptions opt;
  opt.abs_tol = 1e-12;
  opt.max_subdivisions = 20000;
  out.value = integrate<double>(integrand, 0.0, kInf, opt).value / std::tgamma(0.5 * r);
  return out;
}

namespace {

void check_grid_fn(const Vec& g, const DensityGrid1D& density) {
  if (g.size() != density.size()) throw std::invalid_argument("gridded function must live on the density grid");
}

double check_resolution(double scale, const DensityGrid1D& density) {
  if (scale < 20.0 * density.dx)
    throw std::invalid_argument("time step below grid resolution (kernel narrower than 20 grid steps)");
  return scale;
}

}  // namespace

Vec t_family_1d(const Vec& g, double t, const DensityGrid1D& density) {
  check_grid_fn(g, density);
  if (!(t >= 0.0)) throw std::invalid_argument("t_family_1d: t must be non-negative");
  if (t == 0.0) return g;
  const double alpha = density.alpha;
  const double s = check_resolution(std::pow(std::expm1(alpha * t), 1.0 / alpha), density);
  const double et = std::exp(t);
  const double L = density.half_width();
  const UniformSamples conv = stable_convolve(density, g, s, L * et + 8.0 * density.dx);
  Vec out(g.size());
  for (Eigen::Index j = 0; j < g.size(); ++j) out(j) = et * conv.at(et * density.x(j));
  return out;
}

Vec dual_semigroup_1d(const Vec& g, double t, const DensityGrid1D& density) {
  check_grid_fn(g, density);
  if (density.p.minCoeff() < kPositivityFloor) throw std::domain_error("dual_semigroup_1d: positivity floor breached");
  if (t == 0.0) return g;
  const Vec tg = t_family_1d(g.cwiseProduct(density.p), t, density);
  return tg.cwiseQuotient(density.p);
}

Vec stable_semigroup_grid_1d(const Vec& f, double t, const DensityGrid1D& density) {
  check_grid_fn(f, density);
  if (t == 0.0) return f;
  const double c = check_resolution(stable_scale(density.alpha, t), density);
  const double e = std::exp(-t);
  const UniformSamples conv = stable_convolve(density, f, c, density.half_width() + 8.0 * density.dx);
  Vec out(f.size());
  for (Eigen::Index j = 0; j < f.size(); ++j) out(j) = conv.at(e * density.x(j));
  return out;
}

}  // namespace steinlab

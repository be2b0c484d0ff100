#include "steinlab/special.hpp"

#include "steinlab/quadrature.hpp"

#include <limits>
#include <string>

namespace steinlab {

namespace {

void check_gamma_args(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("incomplete gamma: a must be positive");
  if (!(x >= 0.0)) throw std::invalid_argument("incomplete gamma: x must be non-negative");
}

// sum_{n>=0} x^n / (a (a+1) ... (a+n)); lower gamma = e^{-x} x^a * series
double lower_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum;
}

// continued fraction h with Gamma(a, x) = e^{-x} x^a h
double upper_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace

double gamma_p(double a, double x) { return 1.0 - gamma_q(a, x); }

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) {
    const double p = std::exp(-x + a * std::log(x) - std::lgamma(a)) * lower_series(a, x);
    return 1.0 - p;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * upper_fraction(a, x);
}

double upper_incomplete_gamma(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return std::tgamma(a);
  if (x < a + 1.0) {
    const double lower = std::exp(-x + a * std::log(x)) * lower_series(a, x);
    return std::tgamma(a) - lower;
  }
  return std::exp(-x + a * std::log(x)) * upper_fraction(a, x);
}

double upper_incomplete_gamma_scaled(double a, double x) {
  check_gamma_args(a, x);
  if (x < a + 1.0) return std::exp(x) * upper_incomplete_gamma(a, x);
  return std::exp(a * std::log(x)) * upper_fraction(a, x);
}

double gamma_q_inverse(double a, double q) {
  if (!(a > 0.0)) throw std::invalid_argument("gamma_q_inverse: a must be positive");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("gamma_q_inverse: q must lie in (0, 1)");
  // bracket [lo, hi] with Q(lo) >= q >= Q(hi); Q is decreasing
  double lo = 0.0;
  double hi = std::max(1.0, a);
  while (gamma_q(a, hi) > q) {
    lo = hi;
    hi *= 2.0;
  }
  // Wilson-Hilferty start, clipped into the bracket
  const double z = -normal_quantile(q);
  const double s = 1.0 / (9.0 * a);
  double x = a * std::pow(std::max(1.0 - s - z * std::sqrt(s), 1e-3), 3);
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  const double lga = std::lgamma(a);
  for (int it = 0; it < 200; ++it) {
    const double f = gamma_q(a, x) - q;
    if (f > 0.0)
      lo = x;
    else
      hi = x;
    const double dens = std::exp(-x + (a - 1.0) * std::log(x) - lga);
    double next = (dens > 0.0) ? x + f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x)) return next;
    x = next;
    if (hi - lo <= 1e-15 * std::max(1.0, x)) break;
  }
  return x;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("normal_quantile: u must lie in (0, 1)");
  const bool upper = u > 0.5;
  const double pl = upper ? 1.0 - u : u;
  // Abramowitz-Stegun 26.2.23 start in the lower half, then Halley steps
  const double t = std::sqrt(-2.0 * std::log(pl));
  double x = -(t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
                       (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t));
  for (int it = 0; it < 6; ++it) {
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - pl;
    const double dens = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    const double dx = e / dens;
    x -= dx / (1.0 + 0.5 * x * dx);
  }
  return upper ? -x : x;
}

double q_alpha(double alpha, double t) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("q_alpha: alpha must lie in (1, 2)");
  const double one_minus = -std::expm1(-alpha * t);
  const double e = std::exp(-alpha * t);
  return std::exp(-t) * std::pow(one_minus, 1.0 / alpha - 1.0) *
         std::pow(std::pow(one_minus, alpha - 1.0) + e, 1.0 / alpha);
}

double q_alpha_integral(double alpha, double tol) {
  if (!(alpha > 1.0 && alpha < 2.0))
    throw std::invalid_argument("q_alpha_integral: alpha must lie in (1, 2)");
  // u = 1 - e^{-alpha t} gives a Beta-type integrand on (0, 1):
  //   u^{1/a-1} (1-u)^{1/a-1} (u^{a-1} + 1 - u)^{1/a} / a.
  // The endpoint powers are absorbed by u = w^a on [0, 1/2] and 1-u = v^a on [1/2, 1].
  const double ia = 1.0 / alpha;
  const double cut = std::pow(0.5, ia);
  auto left = [&](double w) {
    const double u = std::pow(w, alpha);
    return std::pow(1.0 - u, ia - 1.0) * std::pow(std::pow(u, alpha - 1.0) + 1.0 - u, ia);
  };
  auto right = [&](double v) {
    const double m = std::pow(v, alpha);
    const double u = 1.0 - m;
    return std::pow(u, ia - 1.0) * std::pow(std::pow(u, alpha - 1.0) + m, ia);
  };
  QuadOptions opt;
  opt.abs_tol = 0.5 * tol;
  return integrate<double>(left, 0.0, cut, opt).value + integrate<double>(right, 0.0, cut, opt).value;
}

HermiteEval hermite_eval(const std::vector<int>& k, const Eigen::VectorXd& x) {
  if (static_cast<Eigen::Index>(k.size()) != x.size())
    throw std::invalid_argument("hermite_eval: multi-index and point differ in dimension");
  int degree = 0;
  for (int ki : k) {
    if (ki < 0) throw std::invalid_argument("hermite_eval: negative index");
    degree += ki;
  }
  if (degree > kMaxHermiteDegree)
    throw std::invalid_argument("hermite_eval: degree overflow (|k| = " + std::to_string(degree) + ")");
  const Eigen::Index d = x.size();
  Eigen::VectorXd h(d), h1(d), h2(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    h(i) = hermite(k[i], x(i));
    h1(i) = hermite_derivative(k[i], x(i), 1);
    h2(i) = hermite_derivative(k[i], x(i), 2);
  }
  auto prod_except = [&](Eigen::Index a, Eigen::Index b) {
    double p = 1.0;
    for (Eigen::Index i = 0; i < d; ++i)
      if (i != a && i != b) p *= h(i);
    return p;
  };
  HermiteEval out;
  out.value = h.prod();
  out.gradient.resize(d);
  out.hessian.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    out.gradient(i) = h1(i) * prod_except(i, -1);
    for (Eigen::Index j = 0; j < d; ++j)
      out.hessian(i, j) = (i == j) ? h2(i) * prod_except(i, -1) : h1(i) * h1(j) * prod_except(i, j);
  }
  out.eigenvalue = degree;
  return out;
}

double gaussian_abs_moment(double p) {
  if (!(p > -1.0)) throw std::invalid_argument("gaussian_abs_moment: p must exceed -1");
  auto f = [p](double x) { return std::pow(x, p) * std::exp(-0.5 * x * x); };
  QuadOptions opt;
  opt.abs_tol = 1e-14;
  return 2.0 * integrate<double>(f, 0.0, std::numeric_limits<double>::infinity(), opt).value /
         std::sqrt(2.0 * M_PI);
}

double stable_levy_constant(double alpha) {
  return -alpha * (alpha - 1.0) / (4.0 * std::tgamma(2.0 - alpha) * std::cos(alpha * M_PI / 2.0));
}

double stable_lambda_per_sigma(double alpha) {
  return -std::cos(alpha * M_PI / 2.0) * std::tgamma(2.0 - alpha) / (alpha * (alpha - 1.0));
}

}  // namespace steinlab

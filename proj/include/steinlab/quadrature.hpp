#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace steinlab {

template <typename T>
struct BasicQuadratureResult {
  T value{};
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

using QuadratureResult = BasicQuadratureResult<double>;

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_subdivisions = 4000;
  bool throw_on_failure = true;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

// 15-point Kronrod extension of the 7-point Gauss rule
inline constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                  0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                  0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                  0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                  0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                  0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                  0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                 0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T, typename F>
BasicQuadratureResult<T> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T kron = fc * kWgk[7];
  T gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const T f1 = f(c - dx);
    const T f2 = f(c + dx);
    kron += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) gauss += (f1 + f2) * kWg[j / 2];
  }
  BasicQuadratureResult<T> r;
  r.value = kron * h;
  r.abs_error_estimate = magnitude((kron - gauss) * h);
  r.evaluations = 15;
  return r;
}

template <typename T, typename F>
BasicQuadratureResult<T> adaptive_finite(F& f, double a, double b, const QuadOptions& opt) {
  struct Piece {
    double a, b;
    T value;
    double err;
    bool operator<(const Piece& o) const { return err < o.err; }
  };
  std::priority_queue<Piece> heap;
  auto first = gk15<T>(f, a, b);
  heap.push({a, b, first.value, first.abs_error_estimate});
  T total = first.value;
  double err = first.abs_error_estimate;
  std::size_t evals = first.evaluations;
  std::size_t pieces = 1;
  const auto target = [&]() { return std::max(opt.abs_tol, opt.rel_tol * magnitude(total)); };
  while (err > target() && pieces < opt.max_subdivisions) {
    Piece worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted at double resolution
    heap.pop();
    auto left = gk15<T>(f, worst.a, mid);
    auto right = gk15<T>(f, mid, worst.b);
    evals += 30;
    total += left.value + right.value - worst.value;
    err += left.abs_error_estimate + right.abs_error_estimate - worst.err;
    heap.push({worst.a, mid, left.value, left.abs_error_estimate});
    heap.push({mid, worst.b, right.value, right.abs_error_estimate});
    ++pieces;
  }
  // resum to shed accumulated cancellation in the running totals
  T sum{};
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().err;
    heap.pop();
  }
  BasicQuadratureResult<T> r;
  r.value = sum;
  r.abs_error_estimate = esum;
  r.evaluations = evals;
  r.converged = esum <= std::max(opt.abs_tol, opt.rel_tol * magnitude(sum));
  if (!r.converged && opt.throw_on_failure)
    throw QuadratureError("adaptive quadrature did not converge: error estimate " + std::to_string(esum));
  return r;
}

}  // namespace detail

// Adaptive Gauss-Kronrod on (a, b); infinite endpoints are mapped with a
// tangent substitution. T is double or std::complex<double>.
template <typename T, typename F>
BasicQuadratureResult<T> integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  if (a == b) return {T{}, 0.0, 0, true};
  if (a > b) {
    auto r = integrate<T>(f, b, a, opt);
    r.value = -r.value;
    return r;
  }
  const bool lo_inf = std::isinf(a);
  const bool hi_inf = std::isinf(b);
  if (!lo_inf && !hi_inf) return detail::adaptive_finite<T>(f, a, b, opt);
  if (lo_inf && hi_inf) {
    auto g = [&](double th) -> T {
      const double t = std::tan(th);
      return f(t) * (1.0 + t * t);
    };
    return detail::adaptive_finite<T>(g, -M_PI_2, M_PI_2, opt);
  }
  if (hi_inf) {
    auto g = [&](double th) -> T {
      const double t = std::tan(th);
      return f(a + t) * (1.0 + t * t);
    };
    return detail::adaptive_finite<T>(g, 0.0, M_PI_2, opt);
  }
  auto g = [&](double th) -> T {
    const double t = std::tan(th);
    return f(b - t) * (1.0 + t * t);
  };
  return detail::adaptive_finite<T>(g, 0.0, M_PI_2, opt);
}

QuadratureResult adaptive_quad(const std::function<double(double)>& f, double a, double b, double tol,
                               std::size_t max_subdivisions = 4000);

// Gauss-Legendre rule on [-1, 1]; cached per order.
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
const GaussRule& gauss_legendre(int n);
// Same rule mapped to [a, b].
GaussRule gauss_legendre(int n, double a, double b);

// Probabilists' Gauss-Hermite rule (weight exp(-x^2/2)/sqrt(2 pi)) via Golub-Welsch.
GaussRule gauss_hermite(int n);

// Wynn epsilon extrapolation of a sequence of partial sums.
template <typename T>
T wynn_epsilon(const std::vector<T>& s) {
  const std::size_t n = s.size();
  if (n < 3) return n ? s.back() : T{};
  std::vector<T> e_prev(n + 1, T{}), e_cur(s.begin(), s.end());
  T best = s.back();
  // columns of even index hold estimates
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<T> e_next(n - k);
    bool broke = false;
    for (std::size_t i = 0; i + k < n; ++i) {
      const T diff = e_cur[i + 1] - e_cur[i];
      if (detail::magnitude(diff) < 1e-300) {
        broke = true;
        break;
      }
      e_next[i] = e_prev[i + 1] + T(1.0) / diff;
    }
    if (broke) break;
    e_prev = e_cur;
    e_cur = e_next;
    if (k % 2 == 0) best = e_cur.back();
  }
  return best;
}

}  // namespace steinlab

#include "steinlab/transport.hpp"

#include "steinlab/parallel.hpp"
#include "steinlab/rng.hpp"
#include "steinlab/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace steinlab {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSinkhornRelaxation = 1.6;

void check_pair(const EmpiricalPair& p) {
  if (p.a.rows() != p.b.rows()) throw std::invalid_argument("empirical pair: sample sizes differ");
  if (p.a.cols() != p.b.cols()) throw std::invalid_argument("empirical pair: dimensions differ");
  if (p.a.rows() < 1) throw std::invalid_argument("empirical pair: empty samples");
}

double dist(const Mat& x, Eigen::Index i, const Mat& y, Eigen::Index j) { return (x.row(i) - y.row(j)).norm(); }

struct Potentials {
  Vec f, g;
  double dual = 0.0;
  int iterations = 0;
};

// entropic OT between uniform empiricals x and y: log-domain updates with
// over-relaxation, potentials warm-started across halving eps stages
Potentials sinkhorn_solve(const Mat& x, const Mat& y, double eps_target, int max_iter, double tol, bool symmetric) {
  const Eigen::Index n = x.rows();
  const double logn = std::log(static_cast<double>(n));
  Mat c(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) c(i, j) = dist(x, i, y, j);
  const double cmax = c.maxCoeff();
  Potentials p;
  p.f = Vec::Zero(n);
  p.g = Vec::Zero(n);
  if (cmax == 0.0) return p;
  const Mat ct = c.transpose();
  // out_i = (1 - w) out_i - w eps (LSE_j (other_j - C_ij) / eps - log n); C is read by columns
  auto update = [&](Vec& out, const Vec& other, double eps, const Mat& cols, double w) {
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
      const Eigen::Index i = static_cast<Eigen::Index>(ii);
      const auto ci = cols.col(i);
      double m = -kInf;
      for (Eigen::Index j = 0; j < n; ++j) m = std::max(m, (other(j) - ci(j)) / eps);
      double s = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) s += std::exp((other(j) - ci(j)) / eps - m);
      out(i) = (1.0 - w) * out(i) - w * eps * (m + std::log(s) - logn);
    });
  };
  auto row_error = [&](double eps) {
    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) s += std::exp((p.f(i) + p.g(j) - ct(j, i)) / eps);
      err += std::abs(s / (static_cast<double>(n) * n) - 1.0 / n);
    }
    return err;
  };
  double eps = std::max(cmax, eps_target);
  for (;;) {
    const bool last = eps <= eps_target;
    const int budget = last ? max_iter : 500;
    bool converged = false;
    for (int it = 0; it < budget; ++it) {
      if (symmetric) {
        // averaged fixed-point step f <- (f + S(f)) / 2 of the self-transport problem
        update(p.g, p.f, eps, c, 1.0);
        p.f = 0.5 * (p.f + p.g);
        p.g = p.f;
      } else {
        // plain steps first; over-relaxation once the stage has settled
        const double w = it < 10 ? 1.0 : kSinkhornRelaxation;
        update(p.f, p.g, eps, ct, w);
        update(p.g, p.f, eps, c, 1.0);
      }
      ++p.iterations;
      if ((it + 1) % 10 == 0) {
        const double err = row_error(eps);
        if (err < (last ? tol : std::max(tol, 1e-3))) {
          converged = true;
          break;
        }
      }
    }
    if (last) {
      if (!converged) throw std::runtime_error("w1_sinkhorn: no convergence within max_iter");
      break;
    }
    eps = std::max(0.5 * eps, eps_target);
  }
  p.dual = p.f.mean() + p.g.mean();
  return p;
}

// cost of the feasible coupling obtained by rounding the entropic plan
double rounded_primal(const Mat& x, const Mat& y, const Potentials& p, double eps) {
  const Eigen::Index n = x.rows();
  const double w = 1.0 / static_cast<double>(n);
  auto plan = [&](Eigen::Index i, Eigen::Index j) {
    return std::exp((p.f(i) + p.g(j) - dist(x, i, y, j)) / eps) * w * w;
  };
  Vec rs = Vec::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) rs(i) += plan(i, j);
  Vec sx(n);
  for (Eigen::Index i = 0; i < n; ++i) sx(i) = rs(i) > 0.0 ? std::min(1.0, w / rs(i)) : 1.0;
  Vec cs = Vec::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) cs(j) += sx(i) * plan(i, j);
  Vec sy(n);
  for (Eigen::Index j = 0; j < n; ++j) sy(j) = cs(j) > 0.0 ? std::min(1.0, w / cs(j)) : 1.0;
  Vec r2 = Vec::Zero(n), c2 = Vec::Zero(n);
  double cost = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double q = sx(i) * plan(i, j) * sy(j);
      r2(i) += q;
      c2(j) += q;
      cost += q * dist(x, i, y, j);
    }
  const Vec er = (Vec::Constant(n, w) - r2).cwiseMax(0.0);
  const Vec ec = (Vec::Constant(n, w) - c2).cwiseMax(0.0);
  const double mass = er.sum();
  if (mass > 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (er(i) == 0.0) continue;
      for (Eigen::Index j = 0; j < n; ++j) cost += er(i) * ec(j) / mass * dist(x, i, y, j);
    }
  }
  return cost;
}

double radical_inverse(std::uint64_t k, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % base);
    k /= base;
    f *= inv;
  }
  return r;
}

constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

}  // namespace

EmpiricalPair::EmpiricalPair(Mat a_, Mat b_, std::uint64_t seed_) : a(std::move(a_)), b(std::move(b_)), seed(seed_) {
  check_pair(*this);
}

EmpiricalPair::EmpiricalPair(const SampleBatch& a_, const SampleBatch& b_) : a(a_.data), b(b_.data), seed(a_.seed) {
  check_pair(*this);
}

double w1_exact_1d(const EmpiricalPair& pair) {
  check_pair(pair);
  if (pair.d() != 1) throw std::invalid_argument("w1_exact_1d: one-dimensional samples required");
  std::vector<double> a(pair.a.data(), pair.a.data() + pair.n());
  std::vector<double> b(pair.b.data(), pair.b.data() + pair.n());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

std::vector<Eigen::Index> optimal_assignment(const EmpiricalPair& pair) {
  check_pair(pair);
  const Eigen::Index n = pair.n();
  if (n > kAssignmentGuard) throw std::invalid_argument("w1_exact_assignment: n exceeds the assignment guard");
  // row-major: the inner scan runs along a row
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) c(i, j) = dist(pair.a, i, pair.b, j);
  // 1-based potentials; column 0 is the virtual root
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<Eigen::Index> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Eigen::Index i = 1; i <= n; ++i) {
    p[0] = i;
    Eigen::Index j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Eigen::Index i0 = p[j0];
      double delta = kInf;
      Eigen::Index j1 = 0;
      const double* row = c.data() + (i0 - 1) * n - 1;
      const double ui = u[i0];
      for (Eigen::Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j] - ui - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Eigen::Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Eigen::Index> match(n);
  for (Eigen::Index j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
  return match;
}

double w1_exact_assignment(const EmpiricalPair& pair) {
  const auto match = optimal_assignment(pair);
  std::vector<double> costs(static_cast<std::size_t>(pair.n()));
  for (Eigen::Index i = 0; i < pair.n(); ++i) costs[static_cast<std::size_t>(i)] = dist(pair.a, i, pair.b, match[i]);
  // summing in sorted order makes the value exactly symmetric in (a, b)
  std::sort(costs.begin(), costs.end());
  double s = 0.0;
  for (double c : costs) s += c;
  return s / static_cast<double>(pair.n());
}

SinkhornResult w1_sinkhorn(const EmpiricalPair& pair, double eps, int max_iter, double tol) {
  check_pair(pair);
  if (!(eps > 0.0)) throw std::invalid_argument("w1_sinkhorn: eps must be positive");
  if (max_iter < 1) throw std::invalid_argument("w1_sinkhorn: max_iter must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("w1_sinkhorn: tol must be positive");
  const Potentials ab = sinkhorn_solve(pair.a, pair.b, eps, max_iter, tol, false);
  const Potentials aa = sinkhorn_solve(pair.a, pair.a, eps, max_iter, tol, true);
  const Potentials bb = sinkhorn_solve(pair.b, pair.b, eps, max_iter, tol, true);
  SinkhornResult r;
  r.value = ab.dual - 0.5 * (aa.dual + bb.dual);
  r.primal_upper = rounded_primal(pair.a, pair.b, ab, eps);
  r.duality_gap = std::max(0.0, r.primal_upper - r.value);
  r.bias_bound = 2.0 * eps * std::log(static_cast<double>(pair.n()));
  r.iterations = ab.iterations + aa.iterations + bb.iterations;
  return r;
}

DualBound w1_dual_lower_bound(const EmpiricalPair& pair, const std::vector<TestFunction>& dictionary) {
  check_pair(pair);
  DualBound best;
  const double n = static_cast<double>(pair.n());
  for (const auto& h : dictionary) {
    if (h.d != pair.d()) throw std::invalid_argument("w1_dual_lower_bound: dictionary dimension mismatch");
    if (!(h.lipschitz <= 1.0)) throw std::invalid_argument("w1_dual_lower_bound: member " + h.name + " is not certified 1-Lipschitz");
    Vec ha(pair.n()), hb(pair.n());
    for (Eigen::Index i = 0; i < pair.n(); ++i) {
      ha(i) = h(pair.a.row(i).transpose());
      hb(i) = h(pair.b.row(i).transpose());
    }
    const double diff = std::abs(ha.mean() - hb.mean());
    if (diff > best.value || best.member.empty()) {
      best.value = diff;
      best.member = h.name;
      const double va = (ha.array() - ha.mean()).square().sum() / std::max(1.0, n - 1.0);
      const double vb = (hb.array() - hb.mean()).square().sum() / std::max(1.0, n - 1.0);
      best.std_error = std::sqrt((va + vb) / n);
    }
  }
  return best;
}

std::vector<TestFunction> lipschitz_dictionary(int d, std::uint64_t seed) {
  std::vector<TestFunction> out = scalar_dictionary(d);
  for (int j = 0; j < d; ++j) {
    out.push_back(TestFunction::coordinate(d, j));
    TestFunction neg = TestFunction::callback(
        d, [j](const Vec& x) { return -x(j); }, [d, j](const Vec&) -> Vec { return -Vec::Unit(d, j); },
        [d](const Vec&) -> Mat { return Mat::Zero(d, d); }, "-x" + std::to_string(j + 1));
    neg.lipschitz = 1.0;
    neg.hessian_bound = 0.0;
    out.push_back(neg);
  }
  Rng rng(seed, 0);
  for (int k = 0; k < 16; ++k) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = rng.normal();
    v /= v.norm();
    const double b = rng.uniform(0.0, 2.0 * M_PI);
    TestFunction t = TestFunction::callback(
        d, [v, b](const Vec& x) { return std::sin(v.dot(x) + b); },
        [v, b](const Vec& x) -> Vec { return std::cos(v.dot(x) + b) * v; },
        [v, b](const Vec& x) -> Mat { return -std::sin(v.dot(x) + b) * v * v.transpose(); },
        "ridge_sin_" + std::to_string(k));
    t.lipschitz = 1.0;
    t.hessian_bound = 1.0;
    out.push_back(t);
  }
  return out;
}

double gaussian_norm_mean(int d) {
  return std::sqrt(2.0) * std::exp(std::lgamma(0.5 * (d + 1)) - std::lgamma(0.5 * d));
}

TestFunction mollify_lipschitz(const TestFunction& h, double eps, int nodes) {
  if (!(eps > 0.0)) throw std::invalid_argument("mollify_lipschitz: eps must be positive");
  if (nodes < 2) throw std::invalid_argument("mollify_lipschitz: need at least two nodes");
  const int d = h.d;
  if (d > 20) throw std::invalid_argument("mollify_lipschitz: Halton nodes limited to d <= 20");
  const int half = nodes / 2;
  Mat z(2 * half, d);
  for (int k = 0; k < half; ++k) {
    for (int i = 0; i < d; ++i) {
      const double u = d == 1 ? (k + 0.5) / (2.0 * half) : radical_inverse(static_cast<std::uint64_t>(k) + 1, kPrimes[i]);
      z(k, i) = normal_quantile(u);
    }
    z.row(half + k) = -z.row(k);
  }
  const Mat y = std::sqrt(eps) * z;
  TestFunction out = TestFunction::callback(
      d,
      [h, y](const Vec& x) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < y.rows(); ++k) s += h(x - y.row(k).transpose());
        return s / static_cast<double>(y.rows());
      },
      {}, {}, h.name + "_mollified");
  if (h.has_gradient()) {
    out.gradient = [h, y, d](const Vec& x) {
      Vec s = Vec::Zero(d);
      for (Eigen::Index k = 0; k < y.rows(); ++k) s += h.gradient(x - y.row(k).transpose());
      return Vec(s / static_cast<double>(y.rows()));
    };
  }
  out.lipschitz = h.lipschitz;
  return out;
}

}  // namespace steinlab

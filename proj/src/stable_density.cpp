#include "steinlab/stable_density.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace steinlab {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("stable density: alpha must lie in (1, 2)");
}

// a_k = (1/pi) (-1)^{k+1} Gamma(alpha k + 1) / k! sin(k pi alpha / 2) 2^{-k}
double tail_coefficient(double alpha, int k) {
  const double sign = (k % 2 == 1) ? 1.0 : -1.0;
  return sign / M_PI * std::exp(std::lgamma(alpha * k + 1.0) - std::lgamma(k + 1.0)) *
         std::sin(k * M_PI * alpha / 2.0) * std::pow(0.5, k);
}

}  // namespace

double stable_density_tail(double alpha, double x, int terms) {
  const double ax = std::abs(x);
  double s = 0.0;
  for (int k = 1; k <= terms; ++k) s += tail_coefficient(alpha, k) * std::pow(ax, -alpha * k - 1.0);
  return s;
}

double stable_density_tail_derivative(double alpha, double x, int terms) {
  const double ax = std::abs(x);
  double s = 0.0;
  for (int k = 1; k <= terms; ++k)
    s -= (alpha * k + 1.0) * tail_coefficient(alpha, k) * std::pow(ax, -alpha * k - 2.0);
  return x < 0.0 ? -s : s;
}

double interpolate_uniform(const Eigen::VectorXd& v, double x0, double dx, double y) {
  const Eigen::Index n = v.size();
  const double u = (y - x0) / dx;
  Eigen::Index i0 = static_cast<Eigen::Index>(std::floor(u)) - 2;
  i0 = std::clamp<Eigen::Index>(i0, 0, n - 6);
  const double t = u - static_cast<double>(i0);
  double s = 0.0;
  for (int j = 0; j < 6; ++j) {
    double w = 1.0;
    for (int m = 0; m < 6; ++m)
      if (m != j) w *= (t - m) / static_cast<double>(j - m);
    s += w * v(i0 + j);
  }
  return s;
}

double DensityGrid1D::density(double y) const {
  if (std::abs(y) >= half_width()) return stable_density_tail(alpha, y);
  return interpolate_uniform(p, x(0), dx, y);
}

double DensityGrid1D::derivative(double y) const {
  if (std::abs(y) >= half_width()) return stable_density_tail_derivative(alpha, y);
  return interpolate_uniform(dp, x(0), dx, y);
}

double DensityGrid1D::log_derivative(double y) const {
  const double py = density(y);
  if (!(py >= kPositivityFloor)) throw std::domain_error("stable density below positivity floor");
  return derivative(y) / py;
}

DensityGrid1D stable_density_1d(double alpha, int log2_intervals, double half_width) {
  check_alpha(alpha);
  if (log2_intervals < 8 || log2_intervals > 24) throw std::invalid_argument("stable_density_1d: bad resolution");
  if (!(half_width > 0.0)) throw std::invalid_argument("stable_density_1d: half_width must be positive");
  const Eigen::Index n = Eigen::Index(1) << log2_intervals;  // intervals on the output grid
  const Eigen::Index m = 8 * n;                               // periodic transform length
  const double dx = 2.0 * half_width / static_cast<double>(n);
  const double period = static_cast<double>(m) * dx;
  const double dxi = 2.0 * M_PI / period;

  // (1 + xi) phi(xi): real part of the transform is p, imaginary part is p'
  std::vector<std::complex<double>> in(m), out;
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index kk = (k < m / 2) ? k : k - m;
    const double xi = static_cast<double>(kk) * dxi;
    const double phi = std::exp(-0.5 * std::pow(std::abs(xi), alpha));
    in[k] = (1.0 + xi) * phi;
  }
  Eigen::FFT<double> fft;
  fft.fwd(out, in);

  DensityGrid1D g;
  g.alpha = alpha;
  g.dx = dx;
  g.x.resize(n + 1);
  g.p.resize(n + 1);
  g.dp.resize(n + 1);
  const double scale = 1.0 / period;
  for (Eigen::Index j = 0; j <= n; ++j) {
    const Eigen::Index jj = j - n / 2;
    const Eigen::Index idx = (jj >= 0) ? jj : jj + m;
    g.x(j) = static_cast<double>(jj) * dx;
    g.p(j) = out[idx].real() * scale;
    g.dp(j) = out[idx].imag() * scale;
  }

  // The transform returns sum_k p(x + k period); remove the images with the
  // tail series, evaluated on a coarse grid and interpolated (it varies on the
  // scale of the period).
  const int coarse = 401;
  const double cdx = 2.0 * half_width / (coarse - 1);
  Eigen::VectorXd cp(coarse), cdp(coarse);
  for (int i = 0; i < coarse; ++i) {
    const double xi = -half_width + i * cdx;
    double sp = 0.0, sdp = 0.0;
    for (int k = 64; k >= 1; --k) {
      for (double sgn : {-1.0, 1.0}) {
        const double y = xi + sgn * k * period;
        sp += stable_density_tail(alpha, y);
        sdp += stable_density_tail_derivative(alpha, y);
      }
    }
    cp(i) = sp;
    cdp(i) = sdp;
  }
  for (Eigen::Index j = 0; j <= n; ++j) {
    g.p(j) -= interpolate_uniform(cp, -half_width, cdx, g.x(j));
    g.dp(j) -= interpolate_uniform(cdp, -half_width, cdx, g.x(j));
  }
  // exact symmetry
  for (Eigen::Index j = 0; j < n / 2; ++j) {
    const double ps = 0.5 * (g.p(j) + g.p(n - j));
    const double ds = 0.5 * (g.dp(n - j) - g.dp(j));
    g.p(j) = g.p(n - j) = ps;
    g.dp(n - j) = ds;
    g.dp(j) = -ds;
  }
  g.dp(n / 2) = 0.0;

  double trap = g.p.sum() - 0.5 * (g.p(0) + g.p(n));
  trap *= dx;
  double tails = 0.0;
  for (int k = 1; k <= 4; ++k)
    tails += 2.0 * tail_coefficient(alpha, k) * std::pow(half_width, -alpha * k) / (alpha * k);
  g.mass = trap + tails;
  if (std::abs(g.mass - 1.0) > 1e-4)
    throw std::runtime_error("stable_density_1d: grid too coarse, mass " + std::to_string(g.mass));
  if (g.p.minCoeff() < kPositivityFloor)
    throw std::runtime_error("stable_density_1d: density not positive on the grid");
  return g;
}

std::shared_ptr<const DensityGrid1D> shared_stable_density(double alpha) {
  static std::mutex mu;
  static std::map<double, std::shared_ptr<const DensityGrid1D>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(alpha);
    if (it != cache.end()) return it->second;
  }
  auto grid = std::make_shared<const DensityGrid1D>(stable_density_1d(alpha));
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(alpha, grid).first->second;
}

std::function<double(double)> log_derivative_stable(std::shared_ptr<const DensityGrid1D> grid) {
  if (!grid) throw std::invalid_argument("log_derivative_stable: null grid");
  return [grid](double y) { return grid->log_derivative(y); };
}

double sup_abs_log_derivative(const DensityGrid1D& grid, double lo, double hi) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    if (grid.x(j) < lo || grid.x(j) > hi) continue;
    if (!(grid.p(j) >= kPositivityFloor)) throw std::domain_error("stable density below positivity floor");
    s = std::max(s, std::abs(grid.dp(j) / grid.p(j)));
  }
  return s;
}

void write_density_csv(const DensityGrid1D& grid, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.precision(17);
  os << "x,p,dp\n";
  for (Eigen::Index j = 0; j < grid.size(); ++j) os << grid.x(j) << ',' << grid.p(j) << ',' << grid.dp(j) << '\n';
}

UniformSamples stable_convolve(const DensityGrid1D& grid, const Eigen::VectorXd& g, double scale,
                               double out_half_width) {
  if (g.size() != grid.size()) throw std::invalid_argument("stable_convolve: g must live on the density grid");
  if (!(scale > 0.0)) throw std::invalid_argument("stable_convolve: scale must be positive");
  const Eigen::Index n = grid.size() - 1;
  const double L = grid.half_width();
  const double dx = grid.dx;
  const Eigen::Index k_out = 2 * static_cast<Eigen::Index>(std::ceil(out_half_width / dx));
  const double R = 0.5 * static_cast<double>(k_out) * dx;
  // out_i = sum_j g_j h_{i-j}, h_m = p_s((L - R) + m dx) dx, m in [-n, k_out]
  Eigen::Index len = 1;
  while (len < k_out + 2 * n + 2) len <<= 1;
  std::vector<double> a(len, 0.0), h(len, 0.0);
  for (Eigen::Index j = 0; j <= n; ++j) a[j] = g(j);
  a[0] *= 0.5;
  a[n] *= 0.5;
  for (Eigen::Index mm = -n; mm <= k_out; ++mm) {
    const double y = (L - R) + static_cast<double>(mm) * dx;
    h[(mm + len) % len] = grid.density(y / scale) / scale * dx;
  }
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> fa, fh;
  fft.fwd(fa, a);
  fft.fwd(fh, h);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fh[i];
  std::vector<double> c;
  fft.inv(c, fa, len);
  UniformSamples out;
  out.x0 = -R;
  out.dx = dx;
  out.v.resize(k_out + 1);
  for (Eigen::Index i = 0; i <= k_out; ++i) out.v(i) = c[i];
  return out;
}

}  // namespace steinlab

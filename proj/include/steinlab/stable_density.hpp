#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>

namespace steinlab {

inline constexpr double kPositivityFloor = 1e-300;

// Symmetric alpha-stable density with characteristic function
// exp(-|xi|^alpha / 2) on a uniform symmetric grid.
struct DensityGrid1D {
  double alpha = 0.0;
  double dx = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd p;
  Eigen::VectorXd dp;
  // trapezoid on the grid plus the analytic tails beyond it
  double mass = 0.0;

  Eigen::Index size() const { return x.size(); }
  double half_width() const { return -x(0); }

  // Off-grid evaluation: 6-point Lagrange inside the grid, tail series outside.
  double density(double y) const;
  double derivative(double y) const;
  // p'/p; throws std::domain_error when p drops below kPositivityFloor
  double log_derivative(double y) const;
};

// Fourier inversion on 2^log2_intervals + 1 points spanning [-half_width, half_width].
// The transform runs on an 8x wider periodic grid and the residual wrap-around
// is removed with the tail series. Throws if the mass is off by more than 1e-4.
DensityGrid1D stable_density_1d(double alpha, int log2_intervals = 18, double half_width = 200.0);

// Shared immutable grid per alpha at the default resolution.
std::shared_ptr<const DensityGrid1D> shared_stable_density(double alpha);

// Large-|x| series p(x) ~ sum_k a_k |x|^{-alpha k - 1} and its derivative.
double stable_density_tail(double alpha, double x, int terms = 4);
double stable_density_tail_derivative(double alpha, double x, int terms = 4);

std::function<double(double)> log_derivative_stable(std::shared_ptr<const DensityGrid1D> grid);
// max |p'/p| over grid points in [lo, hi]
double sup_abs_log_derivative(const DensityGrid1D& grid, double lo, double hi);

void write_density_csv(const DensityGrid1D& grid, const std::string& path);

// 6-point Lagrange interpolation of samples v_j at x0 + j dx; clamps the
// stencil at the ends, so callers check the range themselves.
double interpolate_uniform(const Eigen::VectorXd& v, double x0, double dx, double y);

// Samples v_j at x0 + j dx.
struct UniformSamples {
  double x0 = 0.0;
  double dx = 0.0;
  Eigen::VectorXd v;
  double at(double y) const { return interpolate_uniform(v, x0, dx, y); }
  double x_max() const { return x0 + dx * static_cast<double>(v.size() - 1); }
};

// (g * p_s)(y) where p_s(y) = p(y / s) / s, for g sampled on the density grid
// and y on a grid of the same spacing covering at least [-out_half_width, out_half_width].
// Zero-padded FFT convolution with trapezoid weights.
UniformSamples stable_convolve(const DensityGrid1D& grid, const Eigen::VectorXd& g, double scale,
                               double out_half_width);

}  // namespace steinlab

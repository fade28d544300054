#pragma once

// -(kappa(x, y) u'(x))' = 2 on (0, 1), u(0) = u(1) = 0, with
//   kappa(x, y) = 1 + sigma * sum_k cos(2 pi k x) y_k / (k^2 pi^2).
// Conservative second-order finite differences, kappa sampled at cell midpoints.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cfp/error.hpp"

namespace cfp {

struct EllipticConfig {
  std::size_t dim = 2;
  double sigma = 1.0;
  std::size_t grid_points = 1001;  // odd, so x = 0.5 is a node

  /// sigma * sum 1/(k^2 pi^2) < 1 keeps kappa positive for y in [-1,1]^d.
  bool is_elliptic() const {
    double s = 0.0;
    for (std::size_t k = 1; k <= dim; ++k) s += 1.0 / (static_cast<double>(k * k) * M_PI * M_PI);
    return std::abs(sigma) * s < 1.0;
  }
};

inline double diffusivity(const EllipticConfig& cfg, double x, std::span<const double> y) {
  double kappa = 1.0;
  for (std::size_t k = 1; k <= cfg.dim; ++k) {
    const double kk = static_cast<double>(k);
    kappa += cfg.sigma * std::cos(2.0 * M_PI * kk * x) * y[k - 1] / (kk * kk * M_PI * M_PI);
  }
  return kappa;
}

/// u(0.5, y).
inline double solve_bvp(const EllipticConfig& cfg, std::span<const double> y) {
  detail::require(y.size() == cfg.dim, "solve_bvp: parameter has wrong dimension");
  detail::require(cfg.grid_points >= 3 && cfg.grid_points % 2 == 1, "solve_bvp: grid_points must be odd and >= 3");
  detail::require(cfg.is_elliptic(), "solve_bvp: sigma violates the ellipticity bound");

  const std::size_t n = cfg.grid_points - 2;  // interior unknowns
  const double h = 1.0 / static_cast<double>(cfg.grid_points - 1);

  // kappa at x_{i+1/2}, i = 0..grid_points-2
  std::vector<double> kmid(cfg.grid_points - 1);
  for (std::size_t i = 0; i + 1 < cfg.grid_points; ++i) {
    kmid[i] = diffusivity(cfg, (static_cast<double>(i) + 0.5) * h, y);
    if (!(kmid[i] > 0.0)) throw NumericalError("solve_bvp: diffusivity is not positive");
  }

  // Thomas algorithm on -k_{i-1/2} u_{i-1} + (k_{i-1/2} + k_{i+1/2}) u_i - k_{i+1/2} u_{i+1} = 2 h^2.
  std::vector<double> c(n), rhs(n, 2.0 * h * h);
  double denom = kmid[0] + kmid[1];
  c[0] = -kmid[1] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    const double lower = -kmid[i];
    denom = (kmid[i] + kmid[i + 1]) - lower * c[i - 1];
    if (denom == 0.0) throw NumericalError("solve_bvp: singular tridiagonal system");
    c[i] = -kmid[i + 1] / denom;
    rhs[i] = (rhs[i] - lower * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  // Interior unknown j sits at node j + 1; the midpoint node is (grid_points - 1) / 2.
  return rhs[(cfg.grid_points - 1) / 2 - 1];
}

} // namespace cfp

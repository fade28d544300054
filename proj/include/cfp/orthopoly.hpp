#pragma once

// Univariate orthonormal polynomial families defined by three-term recurrences,
// their Gauss rules, and the level sets of phi_N / phi_{N-1} that give
// unit-condition-number weighted designs in one dimension.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cfp/error.hpp"

namespace cfp {

/// Probability densities with closed-form recurrence coefficients.
///   uniform:  rho(y) = 1/2 on [-1, 1]          (Legendre)
///   gaussian: rho(y) = exp(-y^2) / sqrt(pi)     (Hermite, physicists' weight)
enum class Density { uniform, gaussian };

inline std::string_view to_string(Density d) {
  switch (d) {
    case Density::uniform: return "uniform";
    case Density::gaussian: return "gaussian";
  }
  return "unknown";
}

inline Density parse_density(std::string_view name) {
  if (name == "uniform" || name == "legendre") return Density::uniform;
  if (name == "gaussian" || name == "hermite") return Density::gaussian;
  throw PreconditionError("unsupported density kind: " + std::string(name));
}

/// Recurrence data for an orthonormal family:
///   y phi_n = sqrt(b_n) phi_{n-1} + a_n phi_n + sqrt(b_{n+1}) phi_{n+1},  phi_0 = 1.
/// Stores a_0..a_{n_max} and b_1..b_{n_max + 1}; the extra off-diagonal lets
/// phi_{n_max} be paired with phi_{n_max + 1} in Christoffel-Darboux checks.
class RecurrenceTable {
public:
  RecurrenceTable(Density density, std::vector<double> a, std::vector<double> b)
      : density_(density), a_(std::move(a)), b_(std::move(b)), sqrt_b_(b_.size()) {
    detail::require(!a_.empty() && b_.size() == a_.size(), "recurrence table: need |b| == |a| >= 1");
    for (std::size_t i = 0; i < b_.size(); ++i) {
      detail::require(b_[i] > 0.0, "recurrence table: b_n must be positive");
      sqrt_b_[i] = std::sqrt(b_[i]);
    }
  }

  Density density() const noexcept { return density_; }
  std::size_t max_degree() const noexcept { return a_.size() - 1; }

  double a(std::size_t n) const { return a_.at(n); }
  /// b_n for n >= 1.
  double b(std::size_t n) const { return b_.at(n - 1); }
  double sqrt_b(std::size_t n) const { return sqrt_b_.at(n - 1); }

  std::span<const double> diagonal() const noexcept { return a_; }
  std::span<const double> off_diagonal_squared() const noexcept { return b_; }

  /// Fills out[0..out.size()-1] with phi_0(y)..phi_{out.size()-1}(y).
  void evaluate_all(double y, std::span<double> out) const {
    if (out.empty()) return;
    detail::require(out.size() <= a_.size(), "degree exceeds recurrence table range");
    out[0] = 1.0;
    if (out.size() == 1) return;
    out[1] = (y - a_[0]) / sqrt_b_[0];
    for (std::size_t n = 1; n + 1 < out.size(); ++n)
      out[n + 1] = ((y - a_[n]) * out[n] - sqrt_b_[n - 1] * out[n - 1]) / sqrt_b_[n];
  }

  double phi(std::size_t n, double y) const {
    detail::require(n <= max_degree(), "degree exceeds recurrence table range");
    double prev = 0.0;
    double cur = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double next = ((y - a_[k]) * cur - (k > 0 ? sqrt_b_[k - 1] * prev : 0.0)) / sqrt_b_[k];
      prev = cur;
      cur = next;
    }
    return cur;
  }

private:
  Density density_;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> sqrt_b_;
};

inline RecurrenceTable recurrence_coefficients(Density density, std::size_t n_max) {
  detail::require(n_max >= 1, "recurrence_coefficients: n_max must be >= 1");
  std::vector<double> a(n_max + 1, 0.0);
  std::vector<double> b(n_max + 1);
  for (std::size_t k = 1; k <= n_max + 1; ++k) {
    const double n = static_cast<double>(k);
    switch (density) {
      case Density::uniform: b[k - 1] = n * n / (4.0 * n * n - 1.0); break;
      case Density::gaussian: b[k - 1] = n / 2.0; break;
    }
  }
  return RecurrenceTable(density, std::move(a), std::move(b));
}

inline double eval_phi(const RecurrenceTable& table, std::size_t n, double y) { return table.phi(n, y); }

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

/// Eigen-decomposition of the leading N x N Jacobi matrix, optionally with
/// `shift` added to its last diagonal entry.
inline Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> jacobi_eigensolve(const RecurrenceTable& table, std::size_t N,
                                                                         double shift, bool vectors) {
  Eigen::VectorXd diag(N);
  Eigen::VectorXd sub(N > 1 ? N - 1 : 0);
  for (std::size_t i = 0; i < N; ++i) diag(i) = table.a(i);
  for (std::size_t i = 1; i < N; ++i) sub(i - 1) = table.sqrt_b(i);
  diag(N - 1) += shift;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("Jacobi matrix eigensolve failed");
  return es;
}

inline bool is_pole(double phi_prev, double phi_cur) {
  return std::abs(phi_prev) < 1e-12 * std::max(1.0, std::abs(phi_cur));
}

} // namespace detail

/// Golub-Welsch: nodes are Jacobi eigenvalues, weights the squared first
/// eigenvector components (phi_0 = 1 so they sum to one).
inline QuadratureRule gauss_rule(const RecurrenceTable& table, std::size_t N) {
  detail::require(N >= 1 && N <= table.max_degree(), "gauss_rule: need 1 <= N <= n_max");
  auto es = detail::jacobi_eigensolve(table, N, 0.0, true);
  QuadratureRule rule;
  rule.nodes.resize(N);
  rule.weights.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    rule.nodes[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
    const double v0 = es.eigenvectors()(0, static_cast<Eigen::Index>(i));
    rule.weights[i] = v0 * v0;
  }
  return rule;
}

/// r_N(y) = phi_N(y) / phi_{N-1}(y); std::nullopt marks a pole.
inline std::optional<double> r_ratio(const RecurrenceTable& table, std::size_t N, double y) {
  detail::require(N >= 1 && N <= table.max_degree(), "r_ratio: need 1 <= N <= n_max");
  const double num = table.phi(N, y);
  const double den = table.phi(N - 1, y);
  if (detail::is_pole(den, num)) return std::nullopt;
  return num / den;
}

/// Solves r_N(z) = c by bisection, one root per branch of r_N between
/// consecutive zeros of phi_{N-1}. Independent of the eigenvalue route.
inline std::vector<double> level_set_bisection(const RecurrenceTable& table, std::size_t N, double c) {
  detail::require(N >= 1 && N <= table.max_degree(), "level_set: need 1 <= N <= n_max");
  auto below = [&](double z) {
    // r_N(z) < c, written without division so it is well defined between poles.
    const double num = table.phi(N, z);
    const double den = table.phi(N - 1, z);
    return den > 0.0 ? num < c * den : num > c * den;
  };
  auto bisect = [&](double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (below(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };

  std::vector<double> poles;
  if (N >= 2) poles = gauss_rule(table, N - 1).nodes;

  const double left_anchor = poles.empty() ? 0.0 : poles.front();
  const double right_anchor = poles.empty() ? 0.0 : poles.back();
  double step = 1.0;
  double lo = left_anchor - step;
  while (!below(lo)) {
    step *= 2.0;
    lo = left_anchor - step;
    if (step > 1e150) throw NumericalError("level_set: cannot bracket leftmost root");
  }
  step = 1.0;
  double hi = right_anchor + step;
  while (below(hi)) {
    step *= 2.0;
    hi = right_anchor + step;
    if (step > 1e150) throw NumericalError("level_set: cannot bracket rightmost root");
  }

  std::vector<double> roots;
  roots.reserve(N);
  if (poles.empty()) {
    roots.push_back(bisect(lo, hi));
    return roots;
  }
  roots.push_back(bisect(lo, poles.front()));
  for (std::size_t i = 0; i + 1 < poles.size(); ++i) roots.push_back(bisect(poles[i], poles[i + 1]));
  roots.push_back(bisect(poles.back(), hi));
  return roots;
}

/// A_N(y) = r_N^{-1}(r_N(y)), the N solutions of phi_N(z) - c phi_{N-1}(z) = 0.
/// Computed as eigenvalues of the Jacobi matrix with its last diagonal entry
/// shifted by c sqrt(b_N); bisection takes over if the two disagree.
inline std::vector<double> level_set(const RecurrenceTable& table, std::size_t N, double y) {
  detail::require(N >= 1 && N <= table.max_degree(), "level_set: need 1 <= N <= n_max");
  const auto c = r_ratio(table, N, y);
  if (!c) throw PreconditionError("level_set: y is a zero of phi_{N-1}");

  std::vector<double> bisected = level_set_bisection(table, N, *c);
  std::vector<double> nodes(N);
  try {
    auto es = detail::jacobi_eigensolve(table, N, *c * table.sqrt_b(N), false);
    for (std::size_t i = 0; i < N; ++i) nodes[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
  } catch (const NumericalError&) {
    return bisected;
  }
  std::sort(nodes.begin(), nodes.end());
  for (std::size_t i = 0; i < N; ++i) {
    if (std::abs(nodes[i] - bisected[i]) > 1e-8 * std::max(1.0, std::abs(bisected[i]))) return bisected;
  }
  return nodes;
}

/// |sum_q phi_m(z_q) / K(z_q) - delta_{m,0}| for m = 0..max_degree.
inline std::vector<double> quadrature_exactness_report(const RecurrenceTable& table, std::span<const double> nodes,
                                                       std::span<const double> K_values, std::size_t max_degree) {
  detail::require(nodes.size() == K_values.size(), "quadrature_exactness_report: mismatched lengths");
  detail::require(max_degree <= table.max_degree(), "quadrature_exactness_report: degree exceeds table");
  std::vector<double> sums(max_degree + 1, 0.0);
  std::vector<double> phis(max_degree + 1);
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    detail::require(K_values[q] > 0.0, "quadrature_exactness_report: K must be positive");
    table.evaluate_all(nodes[q], phis);
    for (std::size_t m = 0; m <= max_degree; ++m) sums[m] += phis[m] / K_values[q];
  }
  for (std::size_t m = 0; m <= max_degree; ++m) sums[m] = std::abs(sums[m] - (m == 0 ? 1.0 : 0.0));
  return sums;
}

/// K_{0..N-1}(y) = sum_{j<N} phi_j(y)^2 for the univariate family.
inline double christoffel_1d(const RecurrenceTable& table, std::size_t N, double y) {
  std::vector<double> phis(N);
  table.evaluate_all(y, phis);
  double k = 0.0;
  for (double p : phis) k += p * p;
  return k;
}

} // namespace cfp

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cfp/basis.hpp"
#include "cfp/error.hpp"
#include "cfp/random.hpp"

namespace cfp {

/// f_N(y) = sum_k coefficients[k] psi_{alpha(k)}(y).
struct Surrogate {
  ProductBasis basis;
  Eigen::VectorXd coefficients;
};

using TargetFunction = std::function<double(std::span<const double>)>;

inline constexpr double kLsqRankTolerance = 1e-13;

namespace detail {

inline Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs) {
  require(A.rows() >= A.cols(), "least squares: need at least as many samples as basis functions");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(kLsqRankTolerance);
  if (qr.rank() < A.cols()) {
    const Eigen::VectorXd s = singular_values(A);
    throw RankDeficientError("least squares: design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                                 " of " + std::to_string(A.cols()) + ", sigma_N = " + std::to_string(s(s.size() - 1)) +
                                 ")",
                             static_cast<std::size_t>(qr.rank()), s(s.size() - 1));
  }
  return qr.solve(rhs);
}

inline Eigen::VectorXd as_vector(std::span<const double> f) {
  return Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
}

} // namespace detail

/// min |V(A,Q) v - W f| with W = diag(1/sqrt(K(y_m))).
inline Surrogate solve_weighted(const ProductBasis& basis, std::span<const Point> points, std::span<const double> f) {
  detail::require(points.size() == f.size(), "solve_weighted: one value per sample required");
  const DesignMatrix P = vandermonde(basis, points, Space::P);
  const Eigen::VectorXd inv_sqrt_k = P.entries.rowwise().norm().cwiseInverse();
  const Eigen::MatrixXd Q = inv_sqrt_k.asDiagonal() * P.entries;
  const Eigen::VectorXd rhs = inv_sqrt_k.cwiseProduct(detail::as_vector(f));
  return Surrogate{basis, detail::least_squares(Q, rhs)};
}

inline Surrogate solve_unweighted(const ProductBasis& basis, std::span<const Point> points, std::span<const double> f) {
  detail::require(points.size() == f.size(), "solve_unweighted: one value per sample required");
  const DesignMatrix P = vandermonde(basis, points, Space::P);
  return Surrogate{basis, detail::least_squares(P.entries, detail::as_vector(f))};
}

inline double eval_surrogate(const Surrogate& s, std::span<const double> y) {
  return eval_row(s.basis, y, Space::P).dot(s.coefficients);
}

/// Discrete RMS error over iid-rho validation draws.
inline double validation_error(const Surrogate& s, std::span<const Point> points, std::span<const double> f_values) {
  detail::require(!points.empty() && points.size() == f_values.size(), "validation_error: need matching samples");
  double acc = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double e = f_values[i] - eval_surrogate(s, points[i]);
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(points.size()));
}

inline constexpr std::size_t kDefaultValidationSamples = 1000;

inline double validation_error(const Surrogate& s, const TargetFunction& f, Density density, std::size_t n_val,
                               std::uint64_t seed) {
  detail::require(n_val >= 1, "validation_error: n_val must be >= 1");
  Rng rng(derive_seed(seed, {0x7661u}));
  const auto pts = sample_density(density, s.basis.dim(), n_val, rng);
  std::vector<double> fv(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) fv[i] = f(pts[i]);
  return validation_error(s, pts, fv);
}

inline void to_json(nlohmann::json& j, const Surrogate& s) {
  std::vector<std::string> families;
  for (const auto& t : s.basis.tables()) families.emplace_back(to_string(t.density()));
  j = nlohmann::json{{"families", families},
                     {"indices", s.basis.indices()},
                     {"coefficients", std::vector<double>(s.coefficients.begin(), s.coefficients.end())}};
}

inline Surrogate surrogate_from_json(const nlohmann::json& j) {
  const auto families = j.at("families").get<std::vector<std::string>>();
  const auto indices = j.at("indices").get<MultiIndexSet>();
  const auto coeffs = j.at("coefficients").get<std::vector<double>>();
  detail::require(families.size() == indices.dim(), "surrogate JSON: one family per dimension");
  detail::require(coeffs.size() == indices.size(), "surrogate JSON: one coefficient per index");
  std::vector<RecurrenceTable> tables;
  for (std::size_t j2 = 0; j2 < families.size(); ++j2)
    tables.push_back(
        recurrence_coefficients(parse_density(families[j2]), std::max<std::size_t>(1, indices.max_degree(j2))));
  return Surrogate{ProductBasis(std::move(tables), indices),
                   Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()))};
}

} // namespace cfp

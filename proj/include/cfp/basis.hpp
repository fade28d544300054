#pragma once

// Tensor-product orthonormal bases, the Christoffel function K_Lambda, and the
// Vandermonde-like matrices of the polynomial space P(Lambda) and its weighted
// counterpart Q(Lambda) = { p / sqrt(K_Lambda) }.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cfp/error.hpp"
#include "cfp/multiindex.hpp"
#include "cfp/orthopoly.hpp"

namespace cfp {

enum class Space { P, Q };

inline std::string_view to_string(Space s) { return s == Space::P ? "P" : "Q"; }

using Point = std::vector<double>;

class ProductBasis {
public:
  ProductBasis(std::vector<RecurrenceTable> tables, MultiIndexSet indices)
      : tables_(std::move(tables)), indices_(std::move(indices)) {
    detail::require(tables_.size() == indices_.dim(), "product basis: one recurrence table per dimension");
    for (std::size_t j = 0; j < tables_.size(); ++j) {
      detail::require(static_cast<std::size_t>(indices_.max_degree(j)) <= tables_[j].max_degree(),
                      "product basis: index degree exceeds recurrence table range");
    }
  }

  /// Same density in every coordinate, tables sized to the index set.
  static ProductBasis make(Density density, MultiIndexSet indices) {
    std::vector<RecurrenceTable> tables;
    tables.reserve(indices.dim());
    for (std::size_t j = 0; j < indices.dim(); ++j)
      tables.push_back(recurrence_coefficients(density, std::max<std::size_t>(1, indices.max_degree(j))));
    return ProductBasis(std::move(tables), std::move(indices));
  }

  std::size_t dim() const noexcept { return indices_.dim(); }
  std::size_t size() const noexcept { return indices_.size(); }
  const MultiIndexSet& indices() const noexcept { return indices_; }
  const std::vector<RecurrenceTable>& tables() const noexcept { return tables_; }

  /// psi_alpha(y) for every alpha, in index-set order.
  void evaluate(std::span<const double> y, std::span<double> out) const {
    detail::require(y.size() == dim(), "basis evaluation: point has wrong dimension");
    detail::require(out.size() == size(), "basis evaluation: output has wrong length");
    // phis[j] holds phi^j_0..phi^j_{deg_j}(y_j).
    std::vector<std::vector<double>> phis(dim());
    for (std::size_t j = 0; j < dim(); ++j) {
      phis[j].resize(static_cast<std::size_t>(indices_.max_degree(j)) + 1);
      tables_[j].evaluate_all(y[j], phis[j]);
    }
    for (std::size_t k = 0; k < size(); ++k) {
      const MultiIndex& alpha = indices_[k];
      double v = 1.0;
      for (std::size_t j = 0; j < dim(); ++j) v *= phis[j][static_cast<std::size_t>(alpha[j])];
      out[k] = v;
    }
  }

private:
  std::vector<RecurrenceTable> tables_;
  MultiIndexSet indices_;
};

/// m x N matrix with rows psi(y_j) (space P) or psi(y_j)/sqrt(K(y_j)) (space Q).
struct DesignMatrix {
  Eigen::MatrixXd entries;
  Space space = Space::P;

  std::size_t point_count() const noexcept { return static_cast<std::size_t>(entries.rows()); }
  std::size_t basis_size() const noexcept { return static_cast<std::size_t>(entries.cols()); }
};

inline Eigen::VectorXd eval_row(const ProductBasis& basis, std::span<const double> y, Space space) {
  Eigen::VectorXd row(static_cast<Eigen::Index>(basis.size()));
  basis.evaluate(y, std::span<double>(row.data(), basis.size()));
  if (space == Space::Q) row /= row.norm();
  return row;
}

inline double christoffel(const ProductBasis& basis, std::span<const double> y) {
  return eval_row(basis, y, Space::P).squaredNorm();
}

inline DesignMatrix vandermonde(const ProductBasis& basis, std::span<const Point> points, Space space) {
  detail::require(!points.empty(), "vandermonde: point set is empty");
  DesignMatrix V{Eigen::MatrixXd(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(basis.size())),
                 space};
  for (std::size_t i = 0; i < points.size(); ++i)
    V.entries.row(static_cast<Eigen::Index>(i)) = eval_row(basis, points[i], space).transpose();
  return V;
}

inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues();
}

/// sqrt|det(V V^T)| for m <= N, evaluated as the product of singular values.
inline double det_modulus(const Eigen::MatrixXd& V) {
  detail::require(V.rows() <= V.cols(), "det_modulus: need m <= N");
  if (V.rows() == 0) return 1.0;
  return singular_values(V).prod();
}

inline double det_modulus(const DesignMatrix& V) { return det_modulus(V.entries); }

inline constexpr double kSingularFloor = 1e-300;

/// sigma_max / sigma_min over the min(m, N) singular values; +inf if the
/// smallest falls below 1e-300.
inline double condition_number(const Eigen::MatrixXd& V) {
  if (V.rows() == 0 || V.cols() == 0) return 1.0;
  const Eigen::VectorXd s = singular_values(V);
  const double smin = s(s.size() - 1);
  if (!(smin >= kSingularFloor)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

inline double condition_number(const DesignMatrix& V) { return condition_number(V.entries); }

} // namespace cfp

#pragma once

// Sample selection over a finite candidate set.
//
// cfp_select / afp_select run a column-pivoted Householder QR on V^T, where V is
// the candidate Vandermonde matrix in Q (weighted) or P (unweighted) space. The
// k-th pivot is the candidate whose row has the largest component orthogonal to
// the rows already chosen, i.e. the one that maximizes the determinant modulus
// of the selected rows. greedy_select_reference evaluates that objective
// literally and is the oracle for the QR path.
//
// Pivot ties (relative gap below kPivotTieTolerance) go to the lowest candidate
// index. In Q space every row has unit norm, so the first pivot is always
// candidate 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cfp/basis.hpp"
#include "cfp/error.hpp"
#include "cfp/random.hpp"

namespace cfp {

enum class Ensemble { iid, chebyshev, ball, user };

inline std::string_view to_string(Ensemble e) {
  switch (e) {
    case Ensemble::iid: return "iid";
    case Ensemble::chebyshev: return "chebyshev";
    case Ensemble::ball: return "ball";
    case Ensemble::user: return "user";
  }
  return "unknown";
}

struct CandidateSet {
  std::vector<Point> points;
  std::vector<Ensemble> tags;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t dim() const noexcept { return points.empty() ? 0 : points.front().size(); }

  static CandidateSet from_points(std::vector<Point> pts) {
    CandidateSet c;
    c.tags.assign(pts.size(), Ensemble::user);
    c.points = std::move(pts);
    return c;
  }
};

struct DesignResult {
  std::vector<Point> points;
  std::vector<std::size_t> pivot_order;   // indices into the candidate set
  std::vector<double> objective_trace;    // objective after each selection
  std::optional<double> det_modulus;      // set when the design is square
  double condition = 1.0;                 // kappa of the selected rows
  Space space = Space::Q;
};

inline constexpr double kPivotTieTolerance = 1e-10;
inline constexpr double kPivotRankTolerance = 1e-12;

namespace detail {

/// Ball ensemble: density proportional to (1 - |s|^2 / (2n))^{d/2} on |s| <= sqrt(2n).
/// Rejection sampling from the uniform distribution on the ball.
inline std::vector<Point> sample_ball(std::size_t dim, std::size_t count, int degree, Rng& rng) {
  const double radius = std::sqrt(2.0 * std::max(1, degree));
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> out;
  out.reserve(count);
  Point s(dim);
  while (out.size() < count) {
    double nrm = 0.0;
    for (auto& v : s) {
      v = g(rng);
      nrm += v * v;
    }
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) continue;
    const double r = radius * std::pow(u(rng), 1.0 / static_cast<double>(dim));
    for (auto& v : s) v *= r / nrm;
    const double t = (r * r) / (radius * radius);
    const double accept = std::pow(std::max(0.0, 1.0 - t), static_cast<double>(dim) / 2.0);
    if (u(rng) < accept) out.push_back(s);
  }
  return out;
}

inline std::vector<Point> sample_chebyshev(std::size_t dim, std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> out(count, Point(dim));
  for (auto& p : out)
    for (auto& v : p) v = std::cos(M_PI * u(rng));
  return out;
}

/// Drops exact duplicates, keeping the first occurrence. Returns original indices.
inline std::vector<std::size_t> unique_candidates(const CandidateSet& c) {
  std::map<Point, std::size_t> seen;
  std::vector<std::size_t> keep;
  keep.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    if (seen.emplace(c.points[i], i).second) keep.push_back(i);
  return keep;
}

/// Rows of `basis` evaluated at the kept candidates, stored transposed (L x C).
inline Eigen::MatrixXd candidate_matrix_transposed(const ProductBasis& basis, const CandidateSet& c,
                                                   std::span<const std::size_t> keep, Space space) {
  Eigen::MatrixXd Vt(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i)
    Vt.col(static_cast<Eigen::Index>(i)) = eval_row(basis, c.points[keep[i]], space);
  return Vt;
}

/// Lowest index whose score is within the relative tie tolerance of the best.
inline std::size_t argmax_lowest(std::span<const double> score, std::span<const char> excluded) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < score.size(); ++i)
    if (!excluded[i]) best = std::max(best, score[i]);
  for (std::size_t i = 0; i < score.size(); ++i)
    if (!excluded[i] && score[i] >= best * (1.0 - kPivotTieTolerance)) return i;
  return score.size();
}

inline std::size_t argmin_lowest(std::span<const double> score, std::span<const char> excluded) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < score.size(); ++i)
    if (!excluded[i]) best = std::min(best, score[i]);
  for (std::size_t i = 0; i < score.size(); ++i)
    if (!excluded[i] && score[i] <= best * (1.0 + kPivotTieTolerance)) return i;
  return score.size();
}

struct PivotResult {
  std::vector<std::size_t> pivots;  // column indices of Vt
  std::vector<double> trace;        // running product of |R_kk|
};

/// First `count` column pivots of a Householder QR of Vt with exact residual
/// column norms recomputed at every step.
inline PivotResult pivoted_qr(Eigen::MatrixXd Vt, std::size_t count) {
  const Eigen::Index L = Vt.rows();
  const Eigen::Index C = Vt.cols();
  require(count <= static_cast<std::size_t>(L), "pivoted QR: more pivots requested than basis functions");
  require(count <= static_cast<std::size_t>(C), "pivoted QR: more pivots requested than candidates");

  PivotResult out;
  std::vector<char> used(static_cast<std::size_t>(C), 0);
  std::vector<double> norms(static_cast<std::size_t>(C));
  double scale = 0.0;
  double volume = 1.0;
  for (std::size_t k = 0; k < count; ++k) {
    const Eigen::Index rows = L - static_cast<Eigen::Index>(k);
    auto tail = Vt.bottomRows(rows);
    const Eigen::RowVectorXd sq = tail.colwise().squaredNorm();
    for (Eigen::Index j = 0; j < C; ++j) norms[static_cast<std::size_t>(j)] = std::sqrt(sq(j));
    if (k == 0)
      for (double v : norms) scale = std::max(scale, v);

    const std::size_t p = argmax_lowest(norms, used);
    const double pivot_norm = p < norms.size() ? norms[p] : 0.0;
    if (!(pivot_norm > kPivotRankTolerance * scale)) {
      throw RankDeficientError("pivoted QR: candidate matrix has rank " + std::to_string(k) + ", fewer than the " +
                                   std::to_string(count) + " requested samples",
                               k, pivot_norm);
    }

    // Householder reflector mapping column p's tail onto -sign(x0)|x| e_1.
    Eigen::VectorXd v = tail.col(static_cast<Eigen::Index>(p));
    const double alpha = v(0) >= 0.0 ? -pivot_norm : pivot_norm;
    v(0) -= alpha;
    const double vnorm = v.norm();
    if (vnorm > 0.0) {
      v /= vnorm;
      const Eigen::RowVectorXd w = v.transpose() * tail;
      tail.noalias() -= 2.0 * v * w;
    }

    used[p] = 1;
    volume *= pivot_norm;
    out.pivots.push_back(p);
    out.trace.push_back(volume);
  }
  return out;
}

inline DesignResult finish_design(const CandidateSet& c, const ProductBasis& basis, std::span<const std::size_t> keep,
                                  std::span<const std::size_t> local_pivots, std::vector<double> trace, Space space) {
  DesignResult r;
  r.space = space;
  r.objective_trace = std::move(trace);
  for (std::size_t p : local_pivots) {
    r.pivot_order.push_back(keep[p]);
    r.points.push_back(c.points[keep[p]]);
  }
  const DesignMatrix V = vandermonde(basis, r.points, space);
  r.condition = condition_number(V);
  if (V.point_count() == V.basis_size()) r.det_modulus = det_modulus(V);
  return r;
}

inline DesignResult qr_select(const CandidateSet& candidates, const ProductBasis& basis, std::size_t M, Space space) {
  require(M >= 1, "selection: M must be >= 1");
  require(candidates.dim() == basis.dim(), "selection: candidate dimension does not match basis");
  require(M <= basis.size(), "selection: M exceeds the (enriched) basis size");
  const auto keep = unique_candidates(candidates);
  require(M <= keep.size(), "selection: M exceeds the number of distinct candidates");
  auto pr = pivoted_qr(candidate_matrix_transposed(basis, candidates, keep, space), M);
  return finish_design(candidates, basis, keep, pr.pivots, std::move(pr.trace), space);
}

} // namespace detail

/// Candidate set: M/2 iid draws from rho plus M/2 draws from the degree-
/// asymptotic ensemble (tensor Chebyshev for uniform, ball density for gaussian).
inline CandidateSet candidate_set(std::span<const Density> densities, std::size_t count, int degree_hint,
                                  std::uint64_t seed) {
  detail::require(!densities.empty(), "candidate_set: need at least one dimension");
  detail::require(count >= 2 && count % 2 == 0, "candidate_set: count must be even and >= 2");
  const Density kind = densities.front();
  for (Density d : densities)
    if (d != kind) throw PreconditionError("candidate_set: mixed density families are not supported");
  const std::size_t dim = densities.size();
  const std::size_t half = count / 2;

  Rng iid_rng(derive_seed(seed, {1}));
  Rng asym_rng(derive_seed(seed, {2}));

  CandidateSet c;
  c.seed = seed;
  c.points = sample_density(kind, dim, half, iid_rng);
  c.tags.assign(half, Ensemble::iid);
  std::vector<Point> second = kind == Density::uniform ? detail::sample_chebyshev(dim, half, asym_rng)
                                                       : detail::sample_ball(dim, half, degree_hint, asym_rng);
  c.points.insert(c.points.end(), second.begin(), second.end());
  c.tags.insert(c.tags.end(), half, kind == Density::uniform ? Ensemble::chebyshev : Ensemble::ball);
  return c;
}

inline CandidateSet candidate_set(Density density, std::size_t dim, std::size_t count, int degree_hint,
                                  std::uint64_t seed) {
  const std::vector<Density> ds(dim, density);
  return candidate_set(ds, count, degree_hint, seed);
}

/// Christoffel-weighted approximate Fekete points: greedy determinant
/// maximization in Q space via pivoted QR.
inline DesignResult cfp_select(const CandidateSet& candidates, const ProductBasis& enriched, std::size_t M) {
  return detail::qr_select(candidates, enriched, M, Space::Q);
}

/// Unweighted approximate Fekete points (P space).
inline DesignResult afp_select(const CandidateSet& candidates, const ProductBasis& enriched, std::size_t M) {
  return detail::qr_select(candidates, enriched, M, Space::P);
}

enum class Objective { det, cond };

inline constexpr std::size_t kMaxReferenceCandidates = 1000;

/// Literal greedy: at each step evaluate the objective with every remaining
/// candidate appended and keep the best (lowest index on ties).
inline DesignResult greedy_select_reference(const CandidateSet& candidates, const ProductBasis& basis, std::size_t M,
                                            Space space, Objective objective) {
  detail::require(candidates.size() <= kMaxReferenceCandidates, "greedy reference: at most 1000 candidates");
  detail::require(M >= 1 && M <= basis.size(), "greedy reference: need 1 <= M <= basis size");
  detail::require(candidates.dim() == basis.dim(), "greedy reference: dimension mismatch");
  const auto keep = detail::unique_candidates(candidates);
  detail::require(M <= keep.size(), "greedy reference: M exceeds distinct candidates");

  const Eigen::MatrixXd V = detail::candidate_matrix_transposed(basis, candidates, keep, space).transpose();
  std::vector<char> used(keep.size(), 0);
  std::vector<std::size_t> chosen;
  std::vector<double> trace;
  std::vector<double> score(keep.size());
  Eigen::MatrixXd sub(0, V.cols());
  for (std::size_t step = 0; step < M; ++step) {
    Eigen::MatrixXd trial(static_cast<Eigen::Index>(step + 1), V.cols());
    trial.topRows(static_cast<Eigen::Index>(step)) = sub;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (used[i]) continue;
      trial.row(static_cast<Eigen::Index>(step)) = V.row(static_cast<Eigen::Index>(i));
      score[i] = objective == Objective::det ? det_modulus(trial) : condition_number(trial);
    }
    const std::size_t p = objective == Objective::det ? detail::argmax_lowest(score, used)
                                                      : detail::argmin_lowest(score, used);
    if (objective == Objective::det && !(score[p] > 0.0))
      throw RankDeficientError("greedy reference: rank " + std::to_string(step) + " reached", step, 0.0);
    used[p] = 1;
    chosen.push_back(p);
    trace.push_back(score[p]);
    sub.conservativeResize(static_cast<Eigen::Index>(step + 1), Eigen::NoChange);
    sub.row(static_cast<Eigen::Index>(step)) = V.row(static_cast<Eigen::Index>(p));
  }
  return detail::finish_design(candidates, basis, keep, chosen, std::move(trace), space);
}

inline constexpr double kMaxGlobalSubsets = 1e6;

/// Exhaustive optimum over all N-subsets (first subset in lexicographic order on ties).
inline DesignResult global_select_oracle(const CandidateSet& candidates, const ProductBasis& basis, std::size_t N,
                                         Space space, Objective objective) {
  detail::require(N >= 1, "global oracle: N must be >= 1");
  detail::require(candidates.dim() == basis.dim(), "global oracle: dimension mismatch");
  const auto keep = detail::unique_candidates(candidates);
  detail::require(N <= keep.size(), "global oracle: N exceeds distinct candidates");
  detail::require(objective == Objective::cond || N <= basis.size(), "global oracle: det objective needs N <= basis size");
  detail::require(detail::binomial(keep.size(), N) <= kMaxGlobalSubsets, "global oracle: more than 1e6 subsets");

  const Eigen::MatrixXd V = detail::candidate_matrix_transposed(basis, candidates, keep, space).transpose();
  std::vector<std::size_t> combo(N);
  for (std::size_t i = 0; i < N; ++i) combo[i] = i;
  std::vector<std::size_t> best_combo;
  double best = objective == Objective::det ? -1.0 : std::numeric_limits<double>::infinity();
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(N), V.cols());
  while (true) {
    for (std::size_t i = 0; i < N; ++i)
      sub.row(static_cast<Eigen::Index>(i)) = V.row(static_cast<Eigen::Index>(combo[i]));
    const double value = objective == Objective::det ? det_modulus(sub) : condition_number(sub);
    const bool better = objective == Objective::det ? value > best * (1.0 + kPivotTieTolerance) || best < 0.0
                                                    : value < best * (1.0 - kPivotTieTolerance);
    if (best_combo.empty() || better) {
      best = value;
      best_combo = combo;
    }
    // Next combination in lexicographic order.
    std::size_t i = N;
    while (i > 0 && combo[i - 1] == keep.size() - N + (i - 1)) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t j = i; j < N; ++j) combo[j] = combo[j - 1] + 1;
  }
  return detail::finish_design(candidates, basis, keep, best_combo, {best}, space);
}

inline void to_json(nlohmann::json& j, const DesignResult& r) {
  j = nlohmann::json{{"points", r.points},
                     {"pivot_order", r.pivot_order},
                     {"objective_trace", r.objective_trace},
                     {"space", std::string(to_string(r.space))},
                     {"condition_number", std::isfinite(r.condition) ? nlohmann::json(r.condition) : nlohmann::json("inf")}};
  if (r.det_modulus) j["det_modulus"] = *r.det_modulus;
}

} // namespace cfp

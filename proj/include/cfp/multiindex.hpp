#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfp/error.hpp"

namespace cfp {

using MultiIndex = std::vector<int>;

inline int total_order(const MultiIndex& alpha) { return std::accumulate(alpha.begin(), alpha.end(), 0); }

/// Graded reverse lexicographic order: compare |alpha| first; within a grade
/// alpha precedes beta iff the last nonzero entry of alpha - beta is negative.
/// For d = 2, degree 2 this gives (2,0), (1,1), (0,2).
inline bool grevlex_less(const MultiIndex& alpha, const MultiIndex& beta) {
  const int ga = total_order(alpha);
  const int gb = total_order(beta);
  if (ga != gb) return ga < gb;
  for (std::size_t j = alpha.size(); j-- > 0;) {
    const int diff = alpha[j] - beta[j];
    if (diff != 0) return diff < 0;
  }
  return false;
}

/// Ordered finite set of multi-indices; the order fixes alpha(1)..alpha(N).
class MultiIndexSet {
public:
  MultiIndexSet() = default;

  MultiIndexSet(std::size_t dim, std::vector<MultiIndex> indices) : dim_(dim), indices_(std::move(indices)) {
    detail::require(dim_ >= 1, "multi-index set: dimension must be >= 1");
    detail::require(!indices_.empty(), "multi-index set: must be nonempty");
    std::set<MultiIndex> seen;
    for (const auto& alpha : indices_) {
      detail::require(alpha.size() == dim_, "multi-index set: index has wrong dimension");
      detail::require(std::all_of(alpha.begin(), alpha.end(), [](int v) { return v >= 0; }),
                      "multi-index set: negative entry");
      detail::require(seen.insert(alpha).second, "multi-index set: duplicate index");
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return indices_.size(); }
  const MultiIndex& operator[](std::size_t k) const { return indices_[k]; }
  const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  bool contains(const MultiIndex& alpha) const {
    return std::find(indices_.begin(), indices_.end(), alpha) != indices_.end();
  }

  int max_total_degree() const {
    int n = 0;
    for (const auto& alpha : indices_) n = std::max(n, total_order(alpha));
    return n;
  }

  /// Largest degree appearing in coordinate j.
  int max_degree(std::size_t j) const {
    int n = 0;
    for (const auto& alpha : indices_) n = std::max(n, alpha[j]);
    return n;
  }

  bool is_downward_closed() const {
    std::set<MultiIndex> members(indices_.begin(), indices_.end());
    for (const auto& alpha : indices_) {
      for (std::size_t j = 0; j < dim_; ++j) {
        if (alpha[j] == 0) continue;
        MultiIndex beta = alpha;
        --beta[j];
        if (!members.count(beta)) return false;
      }
    }
    return true;
  }

  friend bool operator==(const MultiIndexSet&, const MultiIndexSet&) = default;

private:
  std::size_t dim_ = 0;
  std::vector<MultiIndex> indices_;
};

namespace detail {

inline constexpr std::size_t kMaxIndexSetSize = 10'000'000;

inline double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

template <typename Accept>
void enumerate_indices(std::size_t dim, int max_entry, Accept&& accept, std::vector<MultiIndex>& out) {
  MultiIndex alpha(dim, 0);
  // Depth-first over coordinates; `accept` must be monotone so pruning is valid.
  auto recurse = [&](auto&& self, std::size_t j) -> void {
    if (j == dim) {
      out.push_back(alpha);
      if (out.size() > kMaxIndexSetSize) throw PreconditionError("multi-index set exceeds 1e7 elements");
      return;
    }
    for (int v = 0; v <= max_entry; ++v) {
      alpha[j] = v;
      if (!accept(alpha)) break;
      self(self, j + 1);
    }
    alpha[j] = 0;
  };
  recurse(recurse, 0);
}

} // namespace detail

inline MultiIndexSet total_degree(std::size_t d, int k) {
  detail::require(d >= 1 && k >= 0, "total_degree: need d >= 1, k >= 0");
  if (detail::binomial(static_cast<std::size_t>(k) + d, d) > static_cast<double>(detail::kMaxIndexSetSize))
    throw PreconditionError("total_degree: set exceeds 1e7 elements");
  std::vector<MultiIndex> out;
  detail::enumerate_indices(d, k, [k](const MultiIndex& a) { return total_order(a) <= k; }, out);
  std::sort(out.begin(), out.end(), grevlex_less);
  return MultiIndexSet(d, std::move(out));
}

inline MultiIndexSet hyperbolic_cross(std::size_t d, int k) {
  detail::require(d >= 1 && k >= 0, "hyperbolic_cross: need d >= 1, k >= 0");
  std::vector<MultiIndex> out;
  const std::int64_t bound = static_cast<std::int64_t>(k) + 1;
  detail::enumerate_indices(
      d, k,
      [bound](const MultiIndex& a) {
        std::int64_t p = 1;
        for (int v : a) {
          p *= v + 1;
          if (p > bound) return false;
        }
        return true;
      },
      out);
  std::sort(out.begin(), out.end(), grevlex_less);
  return MultiIndexSet(d, std::move(out));
}

/// max(1, floor(0.05 N)).
inline std::size_t default_enrichment(std::size_t N) { return std::max<std::size_t>(1, N / 20); }

/// Appends delta_n indices of the smallest total-degree set strictly
/// containing `lambda`, taken in graded reverse lexicographic order.
inline MultiIndexSet enrich(const MultiIndexSet& lambda, std::size_t delta_n) {
  detail::require(delta_n >= 1, "enrich: delta_n must be >= 1");
  detail::require(lambda.is_downward_closed(), "enrich: index set is not downward-closed");
  const std::size_t d = lambda.dim();
  int n = lambda.max_total_degree();
  std::set<MultiIndex> members(lambda.begin(), lambda.end());

  std::vector<MultiIndex> extra;
  while (true) {
    extra.clear();
    for (const auto& alpha : total_degree(d, n))
      if (!members.count(alpha)) extra.push_back(alpha);
    if (extra.size() >= delta_n) break;
    ++n;
  }
  std::vector<MultiIndex> out = lambda.indices();
  out.insert(out.end(), extra.begin(), extra.begin() + static_cast<std::ptrdiff_t>(delta_n));
  return MultiIndexSet(d, std::move(out));
}

inline void to_json(nlohmann::json& j, const MultiIndexSet& s) { j = s.indices(); }

inline void from_json(const nlohmann::json& j, MultiIndexSet& s) {
  auto indices = j.get<std::vector<MultiIndex>>();
  detail::require(!indices.empty(), "multi-index set JSON: empty array");
  const std::size_t d = indices.front().size();
  s = MultiIndexSet(d, std::move(indices));
}

} // namespace cfp

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cfp {

/// Raised when an operation is called outside its documented domain.
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical kernel (eigensolve, linear solve) breaks down.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A design or least-squares matrix lost rank before the requested size.
class RankDeficientError : public NumericalError {
public:
  RankDeficientError(const std::string& what, std::size_t achieved_rank, double smallest_singular_value = 0.0)
      : NumericalError(what), rank_(achieved_rank), sigma_min_(smallest_singular_value) {}

  std::size_t achieved_rank() const noexcept { return rank_; }
  double smallest_singular_value() const noexcept { return sigma_min_; }

private:
  std::size_t rank_;
  double sigma_min_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

} // namespace detail
} // namespace cfp

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "cfp/basis.hpp"
#include "cfp/orthopoly.hpp"

namespace cfp {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent sub-seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = mix_seed(base);
  for (std::uint64_t t : tags) s = mix_seed(s ^ mix_seed(t + 0x632be59bd9b4e019ULL));
  return s;
}

/// iid draws from the tensor-product density rho.
inline std::vector<Point> sample_density(Density density, std::size_t dim, std::size_t count, Rng& rng) {
  std::vector<Point> out(count, Point(dim));
  if (density == Density::uniform) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& p : out)
      for (auto& v : p) v = u(rng);
  } else {
    // exp(-y^2) is a normal density with variance 1/2.
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    for (auto& p : out)
      for (auto& v : p) v = g(rng);
  }
  return out;
}

} // namespace cfp

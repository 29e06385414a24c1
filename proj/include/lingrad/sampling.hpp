#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lingrad/core.hpp"

namespace lingrad {

namespace detail {

inline constexpr int kHaltonPrimes[32] = {
    2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,  37,  41,  43,  47,  53,
    59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

}  // namespace detail

/// Radical-inverse value of `index` (1-based) in the given base; the Halton
/// sequence over one dimension. Deterministic, never 0 or 1.
inline double halton(std::uint64_t index, unsigned base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

/// dim-dimensional Halton point (bases: the first dim primes), index 1-based.
inline StateVector halton_point(std::uint64_t index, int dim) {
  if (dim < 1 || dim > 32) {
    throw InvalidArgumentError("halton_point: dimension must be in [1, 32]");
  }
  StateVector x(dim);
  for (int i = 0; i < dim; ++i) {
    x[i] = halton(index, static_cast<unsigned>(detail::kHaltonPrimes[i]));
  }
  return x;
}

/// `count` quasi-random points filling [lo, hi]^dim, deterministic.
inline std::vector<StateVector> halton_box(int dim, std::size_t count,
                                           double lo, double hi) {
  if (!(hi > lo)) {
    throw InvalidArgumentError("halton_box: requires hi > lo");
  }
  std::vector<StateVector> pts;
  pts.reserve(count);
  for (std::size_t k = 1; k <= count; ++k) {
    StateVector u = halton_point(k, dim);
    pts.push_back(lo + (hi - lo) * u.array());
  }
  return pts;
}

/// `count` pseudo-random points in [lo, hi]^dim from the caller's engine.
inline std::vector<StateVector> uniform_box(std::mt19937_64& rng, int dim,
                                            std::size_t count, double lo,
                                            double hi) {
  if (!(hi > lo)) {
    throw InvalidArgumentError("uniform_box: requires hi > lo");
  }
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<StateVector> pts;
  pts.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    StateVector x(dim);
    for (int i = 0; i < dim; ++i) x[i] = dist(rng);
    pts.push_back(std::move(x));
  }
  return pts;
}

}  // namespace lingrad

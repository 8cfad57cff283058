#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "mmdest/kernels.hpp"

namespace mmdest {

/// Every stochastic routine takes an explicit generator owned by the caller.
using Rng = std::mt19937_64;

/// Draws `count` points (rows) from some distribution.
using Sampler = std::function<MatrixXd(int count, Rng& rng)>;

inline MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd out(rows, cols);
  // Row-major fill so that a sample's first rows do not depend on its total size.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  return out;
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Seed for repetition `rep` of an experiment: base_seed * 10^6 + rep.
inline std::uint64_t repetition_seed(std::uint64_t base_seed, std::uint64_t rep) {
  return base_seed * 1'000'000ULL + rep;
}

}  // namespace mmdest

#pragma once

#include <functional>
#include <vector>

#include "mmdest/kernels.hpp"
#include "mmdest/mmd.hpp"
#include "mmdest/random.hpp"

namespace mmdest {

/// Arithmetic mean of the rows (the Gaussian maximum-likelihood estimator).
VectorXd mean_estimator(const Sample& data);

/// Per-coordinate median; an even count averages the two central order statistics.
VectorXd coordinatewise_median(const Sample& data);

struct GeometricMedianResult {
  VectorXd point;
  int iterations = 0;
  bool converged = false;
};

/// Weiszfeld iteration started at the coordinatewise median, with the Vardi-Zhang
/// update when the iterate coincides with data points. Stops when the iterate moves
/// less than `tol`.
GeometricMedianResult geometric_median(const Sample& data, double tol = 1e-9, int max_iter = 10000);

/// Sum of Euclidean distances from m to the rows of data.
double sum_of_distances(const Sample& data, const VectorXd& m);

/// Coordinatewise median of block means over a random split into `n_blocks` blocks whose
/// sizes differ by at most one. n_blocks <= 0 selects ceil(sqrt(n)).
VectorXd median_of_means(const Sample& data, int n_blocks, Rng& rng);

/// Univariate Gaussian mixture with unit component variances.
struct MixtureFit {
  VectorXd weights;
  VectorXd means;
  double variance = 1.0;
  double loglik = 0.0;
  int iterations = 0;
  std::vector<double> loglik_trace;  // per iteration, for the best restart

  VectorXd density(const Sample& z) const;
};

struct EmOptions {
  int components = 3;
  int restarts = 10;
  int max_iter = 500;
  double tol = 1e-8;
};

/// Expectation-maximization over weights and means (variance fixed at one), best log-likelihood
/// over random restarts. Means are initialized at distinct random data points.
MixtureFit em_mixture(const Sample& data, const EmOptions& options, Rng& rng);

using DensityFn = std::function<VectorXd(const Sample&)>;

/// (1/N) sum |p_true(z) - p_hat(z)| over N draws z ~ p_true.
double mae_density(const DensityFn& p_true, const Sampler& truth_sampler, const DensityFn& p_hat, int draws, Rng& rng);

/// sqrt(mean_r ||theta_r - truth||^2).
double sqrt_mse(const std::vector<VectorXd>& estimates, const VectorXd& truth);

/// sqrt(mean_r ||theta_r - truth||^2 / d): the per-coordinate root mean square error.
double rmse_per_coordinate(const std::vector<VectorXd>& estimates, const VectorXd& truth);

}  // namespace mmdest

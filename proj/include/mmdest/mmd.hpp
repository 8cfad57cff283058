#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mmdest/kernels.hpp"
#include "mmdest/random.hpp"

namespace mmdest {

/// A sample is an n x d matrix, one observation per row.
using Sample = MatrixXd;

/// Squared MMD and its (clamped) square root.
struct MmdValue {
  double squared = 0.0;
  double value = 0.0;

  static MmdValue from_squared(double sq) { return {sq, std::sqrt(std::max(sq, 0.0))}; }
};

namespace detail {
template <typename Scalar>
void check_samples(const Matrix<Scalar>& x, const Matrix<Scalar>& y) {
  if (x.rows() == 0 || y.rows() == 0) throw std::invalid_argument("empty sample");
  if (x.cols() != y.cols()) throw std::invalid_argument("samples have different dimensions");
}

// Row sums accumulated in index order, then summed in index order.
template <typename Scalar>
Scalar ordered_sum(const Matrix<Scalar>& m) {
  const Vector<Scalar> rows = m.rowwise().sum();
  Scalar total = 0;
  for (Eigen::Index i = 0; i < rows.size(); ++i) total += rows(i);
  return total;
}
}  // namespace detail

/// Biased (V-statistic) squared MMD between the empirical measures of x and y.
/// Always non-negative up to rounding.
template <typename Scalar>
MmdValue mmd2_vstat(const Kernel<Scalar>& k, const Matrix<Scalar>& x, const Matrix<Scalar>& y) {
  detail::check_samples(x, y);
  const double n = static_cast<double>(x.rows());
  const double m = static_cast<double>(y.rows());
  // Blocked column sums keep memory linear in the sample sizes.
  const auto total = [&k](const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
    const Vector<Scalar> sums = gram_col_sums(k, a, b);
    Scalar t = 0;
    for (Eigen::Index j = 0; j < sums.size(); ++j) t += sums(j);
    return static_cast<double>(t);
  };
  const double xx = total(x, x) / (n * n);
  const double xy = total(x, y) / (n * m);
  const double yy = total(y, y) / (m * m);
  return MmdValue::from_squared(xx - 2.0 * xy + yy);
}

/// Unbiased estimate of E k(Y, Y') from the off-diagonal pairs of y.
template <typename Scalar>
Scalar mmd2_ustat_model_term(const Kernel<Scalar>& k, const Matrix<Scalar>& y) {
  if (y.rows() < 2) throw std::invalid_argument("U-statistic needs at least two points");
  const Matrix<Scalar> kyy = gram(k, y, y);
  const Scalar m = static_cast<Scalar>(y.rows());
  return (detail::ordered_sum(kyy) - kyy.trace()) / (m * (m - 1));
}

/// Criterion minimized by the estimator, with the data-only term dropped:
/// U-statistic model term minus twice the mean cross kernel value.
/// May be negative; never clamped.
template <typename Scalar>
Scalar crit(const Kernel<Scalar>& k, const Matrix<Scalar>& model_sample, const Matrix<Scalar>& data) {
  detail::check_samples(model_sample, data);
  const Scalar cross = detail::ordered_sum(gram(k, data, model_sample)) /
                       static_cast<Scalar>(data.rows() * model_sample.rows());
  return mmd2_ustat_model_term(k, model_sample) - Scalar(2) * cross;
}

/// E k(X, X') for X ~ N(a, s_x^2 I_d), X' ~ N(b, s_y^2 I_d) under the Gaussian kernel,
/// where `total_variance` = s_x^2 + s_y^2 and `squared_shift` = ||a - b||^2.
inline double gauss_kernel_expectation(double gamma, double total_variance, int d, double squared_shift) {
  const double denom = 2.0 * total_variance + gamma * gamma;
  return std::pow(gamma * gamma / denom, 0.5 * d) * std::exp(-squared_shift / denom);
}

/// Inner product <mu_P, mu_P'> for P = N(theta, s^2 I), P' = N(theta', s^2 I).
inline double closed_form_gauss_inner(double gamma, double sigma, int d, double squared_shift) {
  return gauss_kernel_expectation(gamma, 2.0 * sigma * sigma, d, squared_shift);
}

/// D_k^2(N(theta, s^2 I), N(theta', s^2 I)) under the Gaussian kernel of bandwidth gamma:
/// 2 (g^2/(4s^2+g^2))^{d/2} [1 - exp(-||theta-theta'||^2/(4s^2+g^2))].
template <typename DerivedA, typename DerivedB>
double closed_form_gauss_mmd2(double gamma, double sigma, int d, const Eigen::MatrixBase<DerivedA>& theta,
                              const Eigen::MatrixBase<DerivedB>& theta_prime) {
  if (theta.size() != d || theta_prime.size() != d) throw std::invalid_argument("closed_form_gauss_mmd2: dimension");
  const double denom = 4.0 * sigma * sigma + gamma * gamma;
  const double shift2 = (theta - theta_prime).squaredNorm();
  return 2.0 * std::pow(gamma * gamma / denom, 0.5 * d) * (-std::expm1(-shift2 / denom));
}

struct MonteCarloMean {
  double mean = 0.0;
  double std_error = 0.0;
  int replications = 0;
};

/// Mean over `reps` repetitions of D_k(P_hat_n, P0), where P0 is proxied by an
/// independent sample of size proxy_factor * n drawn from the same sampler.
MonteCarloMean empirical_mmd_to_truth(const Kernel<double>& k, const Sampler& truth, int n, int reps, Rng& rng,
                                      int proxy_factor = 20);

/// Same, for a sampler of whole (possibly dependent) trajectories of length n.
MonteCarloMean empirical_mmd_to_truth(const Kernel<double>& k, const Sampler& trajectory, const Sampler& truth,
                                      int n, int reps, Rng& rng, int proxy_factor = 20);

}  // namespace mmdest

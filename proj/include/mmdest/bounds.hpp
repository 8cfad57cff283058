#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mmdest/kernels.hpp"
#include "mmdest/models.hpp"
#include "mmdest/random.hpp"

namespace mmdest {

enum class BoundId {
  Expectation,
  HighProbability,
  Huber,
  HuberHighProbability,
  Adversarial,
  GaussianParameter,
  CauchyParameter,
  HiddenMarkov,
  HiddenMarkovAdversarial,
  DictionaryParameter,
  Sgd,
  SgdExcess,
  SgdDictionary,
};

std::string to_string(BoundId id);

/// A bound evaluated at concrete inputs.
///
/// `vacuous` means a logarithm or ratio left its domain; the value is then +inf.
/// `uninformative` marks MMD bounds above 2, the diameter of the unit-kernel MMD metric.
struct BoundReport {
  BoundId id = BoundId::Expectation;
  std::vector<std::pair<std::string, double>> inputs;
  double value = 0.0;
  bool vacuous = false;
  bool uninformative = false;
  std::string note;
};

/// E D_k(P_theta_hat, P0) - inf_theta D_k(P_theta, P0) <= 2 sqrt((1 + 2 Sigma) / n).
BoundReport bound_expectation(double n, double sigma);

/// With probability 1 - delta: 2 (sqrt(1 + 2 Sigma) + (1 + Gamma) sqrt(2 log(1/delta))) / sqrt(n).
BoundReport bound_highprob(double n, double sigma, double gamma, double delta);

/// Huber contamination at rate eps: 4 eps + 2 sqrt((1 + 2 Sigma) / n).
BoundReport bound_huber(double n, double sigma, double eps);

/// 2 (2 eps + (sqrt(1 + 2 Sigma) + (1 + Gamma) sqrt(2 log(1/delta))) / sqrt(n)).
BoundReport bound_huber_hp(double n, double sigma, double gamma, double eps, double delta);

/// Adversarial replacement of a fraction eps: 4 eps + 4 sqrt((1 + 2 Sigma) / n).
BoundReport bound_adversarial(double n, double sigma, double eps);

/// Squared parameter error of the Gaussian mean under adversarial contamination:
/// -(4 s^2 + g^2) log{1 - 8 e^{2 s^2 d / g^2} (eps + (1 + sqrt(2 log(1/delta))) / sqrt(n))^2}.
BoundReport bound_gauss_param(double sigma, int d, double gamma, double eps, double n, double delta);

/// K in the Cauchy bound: 96 by default, 128 for the alternative (larger) constant.
enum class CauchyConstant { K96, K128 };

/// Squared parameter error of the Cauchy location with gamma = 2:
/// 4 (1/(1 - K pi x) - 1) with x = eps^2 + (2 + 4 log(1/delta)) / n; vacuous once K pi x >= 1.
BoundReport bound_cauchy_param(double eps, double n, double delta,
                               CauchyConstant constant = CauchyConstant::K96);

/// Hidden Markov mixture fitted as i.i.d.:
/// 2 sqrt((1 + (1-c)^{1/r-1} (3 + c)) / (n [1 - (1-c)^{1/r}])).
BoundReport bound_hmm(double n, double c, int r);
/// 4 eps + 4 sqrt(...) when a fraction eps of the observations is replaced.
BoundReport bound_hmm_adversarial(double n, double c, int r, double eps);

/// Well-specified dictionary: ||theta_hat - theta0||^2 <= 2 (1 + sqrt(2 log(1/delta))) / (lambda_min sqrt(n)).
BoundReport bound_dictionary_param(double n, double delta, double lambda_min);

/// Averaged SGD with constant step D / (M sqrt(T)) on a convex criterion: D M / sqrt(T).
BoundReport bound_sgd(double diameter, double grad_bound, double steps);

/// Excess MMD of the averaged iterate over the best model:
/// 3 sqrt((1 + 2 Sigma) / n) + sqrt(D M / sqrt(T)).
BoundReport bound_sgd_full(double diameter, double grad_bound, double steps, double n, double sigma);

/// Dictionary example (unit diameter, E||grad||^2 <= 4 D): 2 sqrt(D / T).
BoundReport bound_sgd_dictionary(int components, double steps);

/// G_ij = <mu_i, mu_j> for Gaussian dictionary components under a Gaussian kernel (closed form).
MatrixXd dictionary_gram(const DictionaryMixture& dict, double gamma);

/// Monte-Carlo estimate of the same matrix from `draws` points per component and kernel k.
MatrixXd dictionary_gram_monte_carlo(const DictionaryMixture& dict, const Kernel<double>& k, int draws, Rng& rng);

/// Smallest eigenvalue of a symmetric matrix; values within 1e-12 of zero (relative to the
/// largest magnitude) are reported as exactly zero.
double min_eigenvalue(const MatrixXd& symmetric);

}  // namespace mmdest

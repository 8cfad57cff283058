#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "mmdest/kernels.hpp"
#include "mmdest/mmd.hpp"
#include "mmdest/models.hpp"
#include "mmdest/random.hpp"

namespace mmdest {

/// Independent draws from a fixed distribution.
struct IidProcess {
  Sampler draw;
  int dim = 1;
};

/// X_{t+1} = A X_t + eps_{t+1}, started at zero and run for `burn_in` steps.
struct VectorAR {
  MatrixXd A;
  Sampler noise;  // rows are i.i.d. eps_t
  int burn_in = 1000;
};

/// X_{t+1} = (X_t + eta_{t+1}) / 2 with eta ~ Bernoulli(1/2) and X_0 ~ U[0, 1].
/// Not beta-mixing, yet its RKHS dependence coefficients are summable.
struct BinaryHalfAR {
  int burn_in = 1000;
};

/// Hidden chain Y on {0..D-1} with transition matrix P started from its stationary law;
/// the observation X_t is drawn from the Gaussian component Y_t of `emissions`.
struct HiddenMarkov {
  MatrixXd transition;
  DictionaryMixture emissions;
};

class DataProcess {
 public:
  using Kind = std::variant<IidProcess, VectorAR, BinaryHalfAR, HiddenMarkov>;

  /// Validates the specification (operator norm of A below one, stochastic rows, ...).
  explicit DataProcess(Kind kind);

  static DataProcess iid(Sampler draw, int dim) { return DataProcess(IidProcess{std::move(draw), dim}); }
  static DataProcess vector_ar(MatrixXd a, Sampler noise, int burn_in = 1000) {
    return DataProcess(VectorAR{std::move(a), std::move(noise), burn_in});
  }
  static DataProcess gaussian_ar1(double a, double noise_sd = 1.0, int burn_in = 1000);
  static DataProcess binary_half_ar(int burn_in = 1000) { return DataProcess(BinaryHalfAR{burn_in}); }
  static DataProcess hidden_markov(MatrixXd transition, DictionaryMixture emissions) {
    return DataProcess(HiddenMarkov{std::move(transition), std::move(emissions)});
  }

  const Kind& kind() const { return kind_; }
  int dim() const;
  std::string name() const;

  /// Time-ordered trajectory of length n.
  Sample generate(int n, Rng& rng) const;
  Sample generate(int n, std::uint64_t seed) const {
    Rng rng(seed);
    return generate(n, rng);
  }

 private:
  Kind kind_;
};

/// Spectral norm ||A||.
double operator_norm(const MatrixXd& a);

/// Stationary distribution pi (pi P = pi) of a row-stochastic matrix, by power iteration on P^T.
VectorXd stationary_distribution(const MatrixXd& transition, double tol = 1e-14, int max_iter = 100000);

/// Largest c with P^r(i, j) >= c / D for all i, j (the minorization constant of the hidden chain).
double hmm_minorization(const MatrixXd& transition, int r);

struct RhoEstimate {
  int t = 0;
  double value = 0.0;     // |mean difference|
  double signed_value = 0.0;
  double std_error = 0.0;
  long n_pairs = 0;
};

/// Monte-Carlo estimate of rho_t = |E k(X_0, X_t) - E k(X, X')| with X, X' independent
/// draws from the stationary law. Each replication draws two independent trajectories:
/// lag pairs (X_s, X_{s+t}) are pooled along the first, and the product term averages
/// k(X_s, X'_s) across the pair. The standard error comes from the spread of the
/// per-replication differences.
RhoEstimate rho_hat(const DataProcess& process, const Kernel<double>& k, int t, int n_traj, int traj_len,
                    std::uint64_t seed);

struct DependenceConstants {
  double sigma = 0.0;               // sum_t rho_t
  std::optional<double> gamma;      // sum_i gamma_i, when the noise is bounded
};

/// Envelope rho_t <= ||A||^t 2 L E||eps|| / (1 - ||A||) for a vector AR process.
double ar_rho_bound(double a_norm, double lipschitz, double mean_noise_norm, int t);

/// Sigma = 2 ||A|| L E||eps|| / (1 - ||A||)^2 and, given an a.s. bound c on ||eps||,
/// Gamma = 2 c sqrt(L ||A||) / ((1 - ||A||)(1 - sqrt(||A||))).
DependenceConstants ar_sigma_gamma(double a_norm, double lipschitz, double mean_noise_norm,
                                   std::optional<double> noise_bound = std::nullopt);

/// Direct constants for the binary half-AR process: rho_t <= L / 2^t, Sigma = 2L,
/// Gamma = 2 sqrt(L) / (sqrt(2) - 1).
double binary_half_ar_rho_bound(double lipschitz, int t);
DependenceConstants binary_half_ar_constants(double lipschitz);

/// beta_t <= 2 (1 - c)^{t/r - 1} for a chain with P^r(x, .) >= c Q.
double markov_beta_bound(double c, int r, int t);

}  // namespace mmdest

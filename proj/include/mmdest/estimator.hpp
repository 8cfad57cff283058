#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mmdest/kernels.hpp"
#include "mmdest/mmd.hpp"
#include "mmdest/models.hpp"
#include "mmdest/random.hpp"

namespace mmdest {

enum class StepKind { Constant, InverseSqrt };

/// eta_t = scale (Constant) or eta_t = scale / sqrt(t) (InverseSqrt), t = 1, 2, ...
struct StepSchedule {
  StepKind kind = StepKind::InverseSqrt;
  double scale = 1.0;

  static StepSchedule constant(double eta) { return {StepKind::Constant, eta}; }
  static StepSchedule inverse_sqrt(double c = 1.0) { return {StepKind::InverseSqrt, c}; }
  /// Constant step D / (G sqrt(T)) for a set of diameter D and gradient second-moment bound G^2.
  static StepSchedule averaged_sgd(double diameter, double grad_bound, int steps);

  double at(int t) const;
};

struct EstimatorConfig {
  int batch_size = 2;  // M, Monte-Carlo draws per step
  int steps = 1;       // T
  StepSchedule schedule{};
  bool averaging = false;
  int average_from = 1;  // first step included in the average (1 averages every iterate)
  std::optional<VectorXd> init;  // defaults to initial_parameter()
  std::uint64_t seed = 0;
  bool keep_trajectory = false;
  int crit_samples = 0;  // model draws for final_crit; 0 means batch_size

  void validate() const;
};

struct EstimateResult {
  VectorXd theta_hat;                 // averaged iterate when averaging, else last iterate
  VectorXd last_iterate;
  std::vector<VectorXd> trajectory;   // theta^(1..T) when keep_trajectory
  double final_crit = 0.0;            // crit at theta_hat with a fresh model sample
  int steps = 0;
};

/// Thrown when a stochastic gradient leaves the finite range (e.g. mixture density underflow).
class NonFiniteGradient : public std::runtime_error {
 public:
  NonFiniteGradient(const std::string& what, VectorXd theta, VectorXd gradient, int step)
      : std::runtime_error(what), theta(std::move(theta)), gradient(std::move(gradient)), step(step) {}
  VectorXd theta;
  VectorXd gradient;
  int step;
};

/// Components larger than this abort the run.
inline constexpr double kGradientGuard = 1e8;

/// Unbiased Monte-Carlo estimate of grad Crit(theta) from M fresh draws Y ~ P_theta:
/// (2/M) sum_j [ (1/(M-1)) sum_{l != j} k(Y_j, Y_l) - (1/n) sum_i k(X_i, Y_j) ] grad log p_theta(Y_j).
VectorXd grad_estimate(const Kernel<double>& k, const Model& model, const VectorXd& theta, const Sample& data,
                       int batch_size, Rng& rng);

/// Same estimate from a given model batch y (drawn from P_theta by the caller).
VectorXd grad_estimate_from_batch(const Kernel<double>& k, const Model& model, const VectorXd& theta,
                                  const Sample& data, const Sample& y);

/// Coordinatewise median of the data for location families, uniform weights for mixtures.
VectorXd initial_parameter(const Model& model, const Sample& data);

/// Projected stochastic gradient descent on the MMD criterion.
EstimateResult psga(const Kernel<double>& k, const Model& model, const Sample& data, const EstimatorConfig& cfg);

/// Grid point minimizing crit, each evaluated with `crit_samples` model draws generated
/// from the same seed (common random numbers across the grid).
VectorXd grid_search(const Kernel<double>& k, const Model& model, const Sample& data,
                     const std::vector<VectorXd>& grid, int crit_samples, std::uint64_t seed);

/// Deterministic (projected) gradient descent for U[theta - 1/2, theta + 1/2] using the exact gradient.
EstimateResult exact_gradient_descent_uniform(const Kernel<double>& k, const Sample& data, const EstimatorConfig& cfg);

}  // namespace mmdest

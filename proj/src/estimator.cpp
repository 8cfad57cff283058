#include "mmdest/estimator.hpp"

#include <cmath>
#include <sstream>

#include "mmdest/baselines.hpp"
#include "mmdest/errors.hpp"

namespace mmdest {

StepSchedule StepSchedule::averaged_sgd(double diameter, double grad_bound, int steps) {
  if (!(diameter > 0.0) || !(grad_bound > 0.0) || steps < 1)
    throw std::invalid_argument("averaged_sgd step needs positive diameter, gradient bound and steps");
  return constant(diameter / (grad_bound * std::sqrt(static_cast<double>(steps))));
}

double StepSchedule::at(int t) const {
  if (kind == StepKind::Constant) return scale;
  return scale / std::sqrt(static_cast<double>(t));
}

void EstimatorConfig::validate() const {
  if (batch_size < 2) throw ConfigError("estimator: M must be >= 2");
  if (steps < 1) throw ConfigError("estimator: T must be >= 1");
  if (!(schedule.scale > 0.0)) throw ConfigError("estimator: step scale must be positive");
  if (crit_samples < 0 || crit_samples == 1) throw ConfigError("estimator: crit_samples must be 0 or >= 2");
  if (average_from < 1 || average_from > steps) throw ConfigError("estimator: average_from must lie in [1, T]");
}

VectorXd grad_estimate_from_batch(const Kernel<double>& k, const Model& model, const VectorXd& theta,
                                  const Sample& data, const Sample& y) {
  const Eigen::Index m = y.rows();
  if (m < 2) throw std::invalid_argument("grad_estimate: M must be >= 2");
  if (data.cols() != y.cols()) throw std::invalid_argument("grad_estimate: dimension mismatch");
  const MatrixXd scores = model.grad_log_density(theta, y);  // M x p

  // k(y, y) = 1 for the normalized radial kernels.
  const VectorXd model_term = (gram_col_sums(k, y, y).array() - 1.0) / static_cast<double>(m - 1);
  const VectorXd data_term = gram_col_sums(k, data, y) / static_cast<double>(data.rows());
  const VectorXd weights = model_term - data_term;
  return (2.0 / static_cast<double>(m)) * (scores.transpose() * weights);
}

VectorXd grad_estimate(const Kernel<double>& k, const Model& model, const VectorXd& theta, const Sample& data,
                       int batch_size, Rng& rng) {
  if (batch_size < 2) throw std::invalid_argument("grad_estimate: M must be >= 2");
  if (!model.has_score()) throw UnsupportedOperation("model has no score; use the exact gradient");
  const Sample y = model.sample(theta, batch_size, rng);
  return grad_estimate_from_batch(k, model, theta, data, y);
}

VectorXd initial_parameter(const Model& model, const Sample& data) {
  if (model.is_location()) return coordinatewise_median(data);
  return VectorXd::Constant(model.param_dim(), 1.0 / model.param_dim());
}

namespace {

void guard(const VectorXd& theta, const VectorXd& gradient, int step) {
  if (!gradient.allFinite() || gradient.cwiseAbs().maxCoeff() > kGradientGuard) {
    std::ostringstream msg;
    msg << "gradient left the finite range at step " << step << " (max |g| = " << gradient.cwiseAbs().maxCoeff()
        << ")";
    throw NonFiniteGradient(msg.str(), theta, gradient, step);
  }
}

template <typename GradientFn>
EstimateResult descend(const ParamSpace& space, const VectorXd& init, const EstimatorConfig& cfg, GradientFn&& grad) {
  EstimateResult result;
  VectorXd theta = project(space, init);
  VectorXd sum = VectorXd::Zero(theta.size());
  if (cfg.keep_trajectory) result.trajectory.reserve(cfg.steps);
  for (int t = 1; t <= cfg.steps; ++t) {
    const VectorXd g = grad(theta);
    guard(theta, g, t);
    theta = project(space, theta - cfg.schedule.at(t) * g);
    if (t >= cfg.average_from) sum += theta;
    if (cfg.keep_trajectory) result.trajectory.push_back(theta);
  }
  result.last_iterate = theta;
  result.theta_hat = cfg.averaging ? VectorXd(sum / static_cast<double>(cfg.steps - cfg.average_from + 1)) : theta;
  result.steps = cfg.steps;
  return result;
}

}  // namespace

EstimateResult psga(const Kernel<double>& k, const Model& model, const Sample& data, const EstimatorConfig& cfg) {
  cfg.validate();
  if (data.rows() < 1 || data.cols() != model.data_dim()) throw std::invalid_argument("psga: data/model mismatch");
  if (!model.has_score()) throw UnsupportedOperation("psga needs a model score; use exact_gradient_descent_uniform");
  Rng rng(cfg.seed);
  const VectorXd init = cfg.init ? *cfg.init : initial_parameter(model, data);
  EstimateResult result = descend(model.space(), init, cfg, [&](const VectorXd& theta) {
    const Sample y = model.sample(theta, cfg.batch_size, rng);
    return grad_estimate_from_batch(k, model, theta, data, y);
  });
  const int draws = cfg.crit_samples > 0 ? cfg.crit_samples : cfg.batch_size;
  result.final_crit = crit(k, model.sample(result.theta_hat, draws, rng), data);
  return result;
}

VectorXd grid_search(const Kernel<double>& k, const Model& model, const Sample& data,
                     const std::vector<VectorXd>& grid, int crit_samples, std::uint64_t seed) {
  if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
  if (crit_samples < 2) throw std::invalid_argument("grid_search: crit_samples must be >= 2");
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    Rng rng(seed);
    const double value = crit(k, model.sample(grid[g], crit_samples, rng), data);
    if (g == 0 || value < best_value) {
      best = g;
      best_value = value;
    }
  }
  return grid[best];
}

EstimateResult exact_gradient_descent_uniform(const Kernel<double>& k, const Sample& data,
                                              const EstimatorConfig& cfg) {
  EstimatorConfig checked = cfg;
  checked.batch_size = std::max(cfg.batch_size, 2);
  checked.validate();
  if (data.cols() != 1) throw std::invalid_argument("exact gradient descent needs 1-d data");
  const Model model = Model::uniform_translation();
  const VectorXd init = cfg.init ? *cfg.init : initial_parameter(model, data);
  EstimateResult result = descend(model.space(), init, cfg, [&](const VectorXd& theta) {
    return VectorXd::Constant(1, exact_uniform_gradient(k, theta(0), data));
  });
  Rng rng(cfg.seed);
  const int draws = cfg.crit_samples > 0 ? cfg.crit_samples : std::max(cfg.batch_size, 2);
  result.final_crit = crit(k, model.sample(result.theta_hat, draws, rng), data);
  return result;
}

}  // namespace mmdest

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mmdest/errors.hpp"
#include "mmdest/estimator.hpp"

using namespace mmdest;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// theta-dependent part of the population criterion for N(theta, s^2) against fixed data:
// -(2/n) sum_i E k(x_i, Y) = -(2/n) sum_i c exp(-(theta - x_i)^2 / v), v = 2 s^2 + g^2.
struct MixedTerm {
  double gamma, sigma;
  const Sample& data;

  double value(double theta) const {
    const double v = 2 * sigma * sigma + gamma * gamma, c = std::sqrt(gamma * gamma / v);
    double s = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) s += c * std::exp(-std::pow(theta - data(i, 0), 2) / v);
    return -2 * s / data.rows();
  }
  double derivative(double theta) const {
    const double v = 2 * sigma * sigma + gamma * gamma, c = std::sqrt(gamma * gamma / v);
    double s = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const double u = theta - data(i, 0);
      s += c * std::exp(-u * u / v) * (-2 * u / v);
    }
    return -2 * s / data.rows();
  }
};

struct MeanSe {
  double mean, se;
};

MeanSe mean_gradient(const Kernel<double>& k, const Model& m, const VectorXd& theta, const Sample& data, int batch,
                     int calls, Rng& rng) {
  double s = 0, ss = 0;
  for (int r = 0; r < calls; ++r) {
    const double g = grad_estimate(k, m, theta, data, batch, rng)(0);
    s += g;
    ss += g * g;
  }
  const double mean = s / calls;
  return {mean, std::sqrt((ss / calls - mean * mean) / (calls - 1))};
}

EstimatorConfig basic_config(int batch, int steps, std::uint64_t seed) {
  EstimatorConfig cfg;
  cfg.batch_size = batch;
  cfg.steps = steps;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("step schedules") {
  CHECK(StepSchedule::inverse_sqrt(2.0).at(4) == 1.0);
  CHECK(StepSchedule::constant(0.3).at(100) == 0.3);
  CHECK(StepSchedule::averaged_sgd(2.0, 4.0, 100).at(1) == doctest::Approx(0.05));
  CHECK_THROWS(StepSchedule::averaged_sgd(0.0, 1.0, 10));
}

TEST_CASE("configuration validation") {
  CHECK_THROWS_AS(basic_config(1, 10, 0).validate(), ConfigError);
  CHECK_THROWS_AS(basic_config(2, 0, 0).validate(), ConfigError);
  auto cfg = basic_config(2, 10, 0);
  cfg.schedule.scale = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = basic_config(2, 10, 0);
  cfg.average_from = 11;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.average_from = 10;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("equal mixture components get equal gradients") {
  Rng rng(1);
  auto m = Model::dictionary_mixture(gaussian_dictionary({0.5, 0.5}, 1.0));
  Sample data = standard_normal(50, 1, rng);
  for (int r = 0; r < 10; ++r) {
    VectorXd g = grad_estimate(Kernel<double>::gaussian(1.0), m, vec({0.5, 0.5}), data, 20, rng);
    CHECK(std::abs(g(0) - g(1)) <= 1e-12);
  }
}

TEST_CASE("uniform model has no stochastic gradient") {
  Rng rng(2);
  Sample data = Sample::Zero(5, 1);
  CHECK_THROWS_AS(grad_estimate(Kernel<double>::gaussian(1.0), Model::uniform_translation(), vec({0}), data, 5, rng),
                  UnsupportedOperation);
  CHECK_THROWS_AS(psga(Kernel<double>::gaussian(1.0), Model::uniform_translation(), data, basic_config(5, 3, 0)),
                  UnsupportedOperation);
}

TEST_CASE("gaussian gradient matches the analytic mixed-term derivative") {
  Rng rng(3);
  const double gamma = 2.0;
  auto k = Kernel<double>::gaussian(gamma);
  auto m = Model::gaussian_location(1.0, 1);
  Sample data = standard_normal(2000, 1, rng);
  const MixedTerm oracle{gamma, 1.0, data};
  const auto g = mean_gradient(k, m, vec({1.0}), data, 50, 2000, rng);
  CHECK(std::abs(g.mean - oracle.derivative(1.0)) <= 4 * g.se);
}

TEST_CASE("gradient vanishes on average at the population minimizer") {
  Rng rng(4);
  const double gamma = 1.0;
  auto k = Kernel<double>::gaussian(gamma);
  auto m = Model::gaussian_location(1.0, 1);
  Sample data = standard_normal(500, 1, rng).array() + 0.3;
  const MixedTerm oracle{gamma, 1.0, data};
  double best = 0, best_value = 1e300;
  for (double t = -1.0; t <= 1.5; t += 1e-4)
    if (oracle.value(t) < best_value) best_value = oracle.value(t), best = t;
  const auto g = mean_gradient(k, m, vec({best}), data, 50, 2000, rng);
  CHECK(std::abs(g.mean) <= 4 * g.se);
}

TEST_CASE("psga recovers a gaussian mean") {
  Rng rng(5);
  auto k = Kernel<double>::gaussian(1.0);
  auto m = Model::gaussian_location(1.0, 1);
  Sample data = standard_normal(500, 1, rng).array() + 2.0;
  auto cfg = basic_config(500, 2000, 17);
  cfg.init = vec({0.0});
  const auto result = psga(k, m, data, cfg);
  CHECK(std::abs(result.theta_hat(0) - 2.0) <= 0.15);

  std::vector<VectorXd> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(vec({1.5 + 0.005 * i}));
  const VectorXd best = grid_search(k, m, data, grid, 2000, 99);
  CHECK(std::abs(best(0) - result.theta_hat(0)) <= 0.05);
}

TEST_CASE("a single step is one projected gradient step from the start") {
  Rng rng(6);
  auto k = Kernel<double>::gaussian(1.0);
  auto m = Model::dictionary_mixture(gaussian_dictionary({-2.0, 0.0, 2.0}, 1.0));
  Sample data = standard_normal(40, 1, rng);
  auto cfg = basic_config(30, 1, 23);
  cfg.schedule = StepSchedule::constant(5.0);
  const auto result = psga(k, m, data, cfg);

  const VectorXd init = VectorXd::Constant(3, 1.0 / 3);
  Rng replay(23);
  const VectorXd g = grad_estimate(k, m, init, data, 30, replay);
  CHECK((result.theta_hat - project_simplex(init - 5.0 * g)).norm() == 0.0);
  CHECK(result.steps == 1);
}

TEST_CASE("psga on a separated three-component dictionary") {
  Rng rng(7);
  auto m = Model::dictionary_mixture(gaussian_dictionary({-4.0, 0.0, 4.0}, 1.0));
  const VectorXd truth = vec({0.3, 0.3, 0.4});
  Sample data = m.sample(truth, 2000, rng);
  auto cfg = basic_config(200, 2000, 31);
  cfg.averaging = true;
  cfg.keep_trajectory = true;
  const auto result = psga(Kernel<double>::gaussian(1.0), m, data, cfg);
  CHECK((result.theta_hat - truth).norm() <= 0.1);

  for (const auto& theta : result.trajectory) {
    CHECK((theta.array() >= 0.0).all());
    CHECK(std::abs(theta.sum() - 1.0) <= 1e-9);
  }

  // Averaging contract: the returned point is the mean of the stored iterates.
  VectorXd sum = VectorXd::Zero(3);
  for (const auto& theta : result.trajectory) sum += theta;
  CHECK((result.theta_hat - sum / 2000.0).norm() == 0.0);
  CHECK(result.last_iterate == result.trajectory.back());
}

TEST_CASE("tail averaging") {
  Rng rng(8);
  auto m = Model::gaussian_location(1.0, 2);
  Sample data = standard_normal(60, 2, rng);
  auto cfg = basic_config(20, 40, 5);
  cfg.averaging = true;
  cfg.average_from = 31;
  cfg.keep_trajectory = true;
  const auto result = psga(Kernel<double>::gaussian(1.5), m, data, cfg);
  VectorXd sum = VectorXd::Zero(2);
  for (int t = 30; t < 40; ++t) sum += result.trajectory[t];
  CHECK((result.theta_hat - sum / 10.0).norm() == 0.0);
}

TEST_CASE("psga is deterministic per seed") {
  Rng rng(9);
  auto m = Model::gaussian_location(1.0, 3);
  Sample data = standard_normal(80, 3, rng);
  auto k = Kernel<double>::gaussian(std::sqrt(3.0));
  const auto a = psga(k, m, data, basic_config(40, 50, 77));
  const auto b = psga(k, m, data, basic_config(40, 50, 77));
  const auto c = psga(k, m, data, basic_config(40, 50, 78));
  CHECK(a.theta_hat == b.theta_hat);
  CHECK(a.final_crit == b.final_crit);
  CHECK(a.theta_hat != c.theta_hat);
}

TEST_CASE("psga lowers the criterion from the start") {
  Rng rng(10);
  auto k = Kernel<double>::gaussian(1.0);
  auto m = Model::gaussian_location(1.0, 1);
  Sample data = standard_normal(200, 1, rng).array() + 1.0;
  const VectorXd init = vec({-1.0});
  std::vector<double> before, after;
  for (int s = 0; s < 20; ++s) {
    auto cfg = basic_config(100, 200, 1000 + s);
    cfg.init = init;
    const auto result = psga(k, m, data, cfg);
    Rng a(s), b(s);
    before.push_back(crit(k, m.sample(init, 200, a), data));
    after.push_back(crit(k, m.sample(result.theta_hat, 200, b), data));
  }
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  CHECK(after[10] <= before[10]);
}

TEST_CASE("grid search") {
  Rng rng(11);
  auto k = Kernel<double>::gaussian(1.0);
  auto m = Model::gaussian_location(1.0, 1);
  Sample data = standard_normal(100, 1, rng);
  CHECK(grid_search(k, m, data, {vec({3.0})}, 10, 1) == vec({3.0}));
  CHECK_THROWS(grid_search(k, m, data, {}, 10, 1));

  // Large-sample limit: the population mixed term is minimized at the true mean.
  Sample big = standard_normal(20000, 1, rng).array() + 0.5;
  const MixedTerm oracle{1.0, 1.0, big};
  double best = 0, best_value = 1e300;
  for (double t = -0.5; t <= 1.5; t += 0.05)
    if (oracle.value(t) < best_value) best_value = oracle.value(t), best = t;
  CHECK(std::abs(best - 0.5) <= 0.05 + 1e-12);
}

TEST_CASE("exact descent for the uniform translation model") {
  auto k = Kernel<double>::gaussian(1.0);
  Sample pair(2, 1);
  pair << 0.75, 1.25;
  auto cfg = basic_config(2, 50, 0);
  cfg.init = vec({1.0});
  CHECK(std::abs(exact_gradient_descent_uniform(k, pair, cfg).theta_hat(0) - 1.0) < 1e-15);

  Rng rng(12);
  Sample data = Model::uniform_translation().sample(vec({1.0}), 500, rng);
  auto narrow = Kernel<double>::gaussian(0.1);
  auto cfg2 = basic_config(2, 2000, 0);
  cfg2.schedule = StepSchedule::inverse_sqrt(0.1);
  const auto result = exact_gradient_descent_uniform(narrow, data, cfg2);
  CHECK(std::abs(result.theta_hat(0) - 1.0) <= 0.05);

  auto bad = basic_config(2, 0, 0);
  CHECK_THROWS_AS(exact_gradient_descent_uniform(k, data, bad), ConfigError);
}

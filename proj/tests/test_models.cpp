#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mmdest/errors.hpp"
#include "mmdest/models.hpp"

using namespace mmdest;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

VectorXd finite_difference_score(const Model& m, const VectorXd& theta, const VectorXd& x, double h) {
  VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    VectorXd up = theta, down = theta;
    up(i) += h;
    down(i) -= h;
    g(i) = (m.log_density(up, x) - m.log_density(down, x)) / (2 * h);
  }
  return g;
}

Model three_component_mixture() {
  return Model::dictionary_mixture(gaussian_dictionary({-2.0, 0.5, 3.0}, 1.0));
}

}  // namespace

TEST_CASE("gaussian sample mean") {
  Rng rng(1);
  auto m = Model::gaussian_location(1.0, 2);
  Sample s = m.sample(VectorXd::Zero(2), 100000, rng);
  const VectorXd mean = s.colwise().mean();
  CHECK(mean.norm() <= 4.0 / std::sqrt(1e5) * std::sqrt(2.0));
}

TEST_CASE("uniform draws stay in the support") {
  Rng rng(2);
  Sample s = Model::uniform_translation().sample(VectorXd::Zero(1), 10000, rng);
  CHECK(s.minCoeff() >= -0.5);
  CHECK(s.maxCoeff() <= 0.5);
}

TEST_CASE("single-component mixture samples its component") {
  Rng rng(3);
  auto m = Model::dictionary_mixture(gaussian_dictionary({1.5}, 4.0));
  Sample s = m.sample(VectorXd::Ones(1), 10000, rng);
  std::vector<double> v(s.data(), s.data() + s.size());
  std::sort(v.begin(), v.end());
  // Kolmogorov distance to N(1.5, 4).
  double ks = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-(v[i] - 1.5) / (2.0 * std::sqrt(2.0)));
    ks = std::max({ks, std::abs(cdf - double(i) / v.size()), std::abs(cdf - double(i + 1) / v.size())});
  }
  CHECK(ks < 1.63 / std::sqrt(1e4));
}

TEST_CASE("cauchy quartiles") {
  Rng rng(4);
  Sample s = Model::cauchy_location().sample(vec({2.0}), 10000, rng);
  const double below_lo = (s.array() <= 1.0).cast<double>().mean();
  const double below_hi = (s.array() <= 3.0).cast<double>().mean();
  CHECK(std::abs(below_lo - 0.25) <= 0.02);
  CHECK(std::abs(below_hi - 0.75) <= 0.02);
}

TEST_CASE("sampling is deterministic per seed and checks the parameter") {
  auto m = three_component_mixture();
  Rng a(5), b(5);
  const VectorXd w = vec({0.2, 0.3, 0.5});
  CHECK(m.sample(w, 50, a) == m.sample(w, 50, b));
  CHECK_THROWS(m.sample(vec({0.5, 0.6, 0.1}), 3, a));
  CHECK_THROWS(m.sample(w, 0, a));
}

TEST_CASE("score values") {
  auto g = Model::gaussian_location(1.0, 1);
  CHECK(g.grad_log_density(vec({0}), vec({2}))(0) == 2.0);
  CHECK(Model::cauchy_location().grad_log_density(vec({0}), vec({0}))(0) == 0.0);
  auto twin = Model::dictionary_mixture(gaussian_dictionary({0.0, 0.0}, 1.0));
  VectorXd s = twin.grad_log_density(vec({0.5, 0.5}), vec({1.3}));
  CHECK(s(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s(1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(Model::uniform_translation().grad_log_density(vec({0}), vec({0})), UnsupportedOperation);
  CHECK_FALSE(Model::uniform_translation().has_score());
}

TEST_CASE("scores match finite differences of the log density") {
  Rng rng(6);
  const double h = 1e-5;
  auto check = [&](const Model& m, const VectorXd& theta, const VectorXd& x) {
    const VectorXd analytic = m.grad_log_density(theta, x);
    const VectorXd numeric = finite_difference_score(m, theta, x, h);
    for (Eigen::Index i = 0; i < analytic.size(); ++i)
      CHECK(std::abs(analytic(i) - numeric(i)) <= 1e-4 * std::max(1.0, std::abs(analytic(i))));
  };
  auto g = Model::gaussian_location(1.5, 3);
  auto c = Model::cauchy_location();
  auto mix = three_component_mixture();
  for (int trial = 0; trial < 20; ++trial) {
    check(g, standard_normal(3, 1, rng), 2.0 * standard_normal(3, 1, rng));
    check(c, standard_normal(1, 1, rng), 3.0 * standard_normal(1, 1, rng));
    VectorXd w = (standard_normal(3, 1, rng).array().abs() + 0.1).matrix();
    w /= w.sum();
    check(mix, w, 3.0 * standard_normal(1, 1, rng));
  }
}

TEST_CASE("score identity") {
  // Location scores have mean zero. Mixture weight scores Phi_l / p have mean int Phi_l = 1,
  // so their projection onto the simplex tangent space has mean zero.
  Rng rng(7);
  auto check = [&](const Model& m, const VectorXd& theta, double expected = 0.0) {
    Sample y = m.sample(theta, 10000, rng);
    MatrixXd s = m.grad_log_density(theta, y);
    for (Eigen::Index c = 0; c < s.cols(); ++c) {
      const double mean = s.col(c).mean();
      const double sd = std::sqrt((s.col(c).array() - mean).square().sum() / (s.rows() - 1));
      CHECK(std::abs(mean - expected) <= 4 * sd / std::sqrt(1e4));
    }
  };
  check(Model::gaussian_location(1.0, 2), vec({1.0, -1.0}));
  check(Model::cauchy_location(), vec({0.3}));
  check(three_component_mixture(), vec({0.3, 0.3, 0.4}), 1.0);

  auto mix = three_component_mixture();
  const VectorXd w = vec({0.3, 0.3, 0.4});
  MatrixXd s = mix.grad_log_density(w, mix.sample(w, 100, rng));
  CHECK(((s * w).array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("simplex projection") {
  CHECK(project_simplex(vec({2, 0})) == vec({1, 0}));
  const VectorXd third = VectorXd::Constant(3, 1.0 / 3);
  CHECK((project_simplex(third) - third).norm() < 1e-15);

  // Grid oracle over the simplex at resolution 1e-3.
  const VectorXd v = vec({0.5, 0.3, -0.1});
  VectorXd best;
  double best_d = 1e300;
  for (int i = 0; i <= 1000; ++i)
    for (int j = 0; i + j <= 1000; ++j) {
      VectorXd u = vec({i / 1000.0, j / 1000.0, (1000 - i - j) / 1000.0});
      const double dist = (u - v).squaredNorm();
      if (dist < best_d) best_d = dist, best = u;
    }
  CHECK((project_simplex(v) - best).norm() <= 1.5e-3);

  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd p = project_simplex(3.0 * standard_normal(7, 1, rng));
    CHECK(ParamSpace::simplex(7).contains(p));
  }
}

TEST_CASE("projection onto boxes and euclidean spaces") {
  CHECK(project(ParamSpace::box(2, -1, 1), vec({3, -0.5})) == vec({1, -0.5}));
  CHECK(project(ParamSpace::euclidean(2), vec({3, -0.5})) == vec({3, -0.5}));
  CHECK_THROWS(project(ParamSpace::euclidean(2), vec({1})));
  CHECK_THROWS(ParamSpace::box(1, 1, 0));
}

TEST_CASE("densities") {
  CHECK(Model::cauchy_location().density(vec({0}), vec({0})) == doctest::Approx(1 / std::numbers::pi).epsilon(1e-14));
  CHECK(Model::gaussian_location(1, 1).density(vec({0}), vec({0})) ==
        doctest::Approx(0.398942280401).epsilon(1e-11));
  CHECK(Model::uniform_translation().density(vec({0}), vec({0.6})) == 0.0);
  CHECK(Model::uniform_translation().density(vec({0}), vec({0.4})) == 1.0);
  auto mix = three_component_mixture();
  Sample z(2, 1);
  z << 0.0, 1.0;
  VectorXd batch = mix.density(vec({0.2, 0.3, 0.5}), z);
  CHECK(batch(1) == doctest::Approx(mix.density(vec({0.2, 0.3, 0.5}), vec({1.0}))).epsilon(1e-13));
}

TEST_CASE("exact uniform gradient") {
  auto k = Kernel<double>::gaussian(1.0);
  Sample sym(2, 1);
  sym << 0.7, 1.3;
  CHECK(std::abs(exact_uniform_gradient(k, 1.0, sym)) < 1e-15);
  CHECK(std::abs(exact_uniform_gradient(k, 0.4, Sample::Constant(1, 1, 0.4))) < 1e-15);
  CHECK_THROWS(exact_uniform_gradient(k, 0.0, Sample(2, 2)));

  // Quadrature oracle: the theta-dependent part of the criterion is
  // -(2/n) sum_i int_{theta-1/2}^{theta+1/2} K(y - X_i) dy.
  Rng rng(9);
  Sample data = standard_normal(25, 1, rng);
  auto integral_crit = [&](double theta) {
    const int cells = 100000;
    const double h = 1.0 / cells;
    double total = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      double s = k.profile(theta - 0.5 - data(i, 0)) + k.profile(theta + 0.5 - data(i, 0));
      for (int j = 1; j < cells; ++j) s += (j % 2 ? 4.0 : 2.0) * k.profile(theta - 0.5 + j * h - data(i, 0));
      total += s * h / 3;
    }
    return -2.0 * total / data.rows();
  };
  for (double theta : {-0.8, 0.1, 1.2}) {
    const double fd = (integral_crit(theta + 1e-3) - integral_crit(theta - 1e-3)) / 2e-3;
    CHECK(std::abs(fd - exact_uniform_gradient(k, theta, data)) <= 1e-4);
  }
}

TEST_CASE("dictionary construction") {
  auto dict = gaussian_dictionary(-5, 5, 0.02, 1.0);
  CHECK(dict.means.rows() == 501);
  CHECK(dict.means(500, 0) == doctest::Approx(5.0));
  CHECK_THROWS_AS(gaussian_dictionary(0, 1, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(gaussian_dictionary({}, 1.0), ConfigError);
  CHECK_THROWS_AS(Model::gaussian_location(0.0, 1), ConfigError);
}

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mmdest/dependence.hpp"
#include "mmdest/errors.hpp"

using namespace mmdest;

namespace {

double lag1_autocorrelation(const Sample& x) {
  const double mean = x.col(0).mean();
  const Eigen::ArrayXd c = x.col(0).array() - mean;
  const Eigen::Index n = c.size();
  return (c.head(n - 1) * c.tail(n - 1)).sum() / c.square().sum();
}

MatrixXd hmm_transition() { return MatrixXd::Constant(3, 3, 0.3) + 0.1 * MatrixXd::Identity(3, 3); }

const double kMeanAbsNormal = std::sqrt(2.0 / std::numbers::pi);

}  // namespace

TEST_CASE("iid trajectories have no lag-one covariance") {
  auto p = DataProcess::iid([](int count, Rng& r) { return standard_normal(count, 1, r); }, 1);
  Sample x = p.generate(100000, 1);
  const double mean = x.mean();
  const Eigen::ArrayXd c = x.col(0).array() - mean;
  const double cov = (c.head(99999) * c.tail(99999)).mean();
  CHECK(std::abs(cov) <= 4.0 / std::sqrt(1e5));
}

TEST_CASE("binary half autoregression") {
  Sample x = DataProcess::binary_half_ar().generate(100000, 2);
  CHECK(x.minCoeff() >= 0.0);
  CHECK(x.maxCoeff() <= 1.0);
  CHECK(std::abs(x.mean() - 0.5) <= 0.01);
}

TEST_CASE("gaussian AR(1) autocorrelation") {
  Sample x = DataProcess::gaussian_ar1(0.5).generate(100000, 3);
  CHECK(std::abs(lag1_autocorrelation(x) - 0.5) <= 0.02);
}

TEST_CASE("generation is deterministic per seed") {
  auto p = DataProcess::gaussian_ar1(0.3);
  CHECK(p.generate(50, 7) == p.generate(50, 7));
  CHECK(p.generate(50, 7) != p.generate(50, 8));
  CHECK_THROWS(p.generate(0, 7));
}

TEST_CASE("invalid processes are rejected") {
  auto noise = [](int count, Rng& r) { return standard_normal(count, 2, r); };
  MatrixXd unstable(2, 2);
  unstable << 0.9, 0.5, 0.0, 0.6;
  CHECK(operator_norm(unstable) >= 1.0);
  CHECK_THROWS_AS(DataProcess::vector_ar(unstable, noise), ConfigError);
  CHECK_THROWS_AS(DataProcess::gaussian_ar1(1.0), ConfigError);
  CHECK_THROWS_AS(DataProcess::binary_half_ar(-1), ConfigError);
  MatrixXd leaky = hmm_transition();
  leaky(0, 0) = 0.5;
  CHECK_THROWS_AS(DataProcess::hidden_markov(leaky, gaussian_dictionary({-3.0, 0.0, 3.0}, 1.0)), ConfigError);
  CHECK_THROWS_AS(ar_sigma_gamma(1.0, 1.0, 1.0), ConfigError);
}

TEST_CASE("stationary distribution and hidden Markov frequencies") {
  MatrixXd p(3, 3);
  p << 0.5, 0.3, 0.2, 0.1, 0.8, 0.1, 0.25, 0.25, 0.5;
  const VectorXd pi = stationary_distribution(p);
  // Oracle: left null vector of P - I from a dense eigen-decomposition.
  Eigen::EigenSolver<MatrixXd> es(p.transpose());
  Eigen::Index best = 0;
  (es.eigenvalues().array() - 1.0).abs().minCoeff(&best);
  VectorXd oracle = es.eigenvectors().col(best).real();
  oracle /= oracle.sum();
  CHECK((pi - oracle).cwiseAbs().maxCoeff() <= 1e-10);

  // Emissions far apart so the component is readable from the observation.
  auto proc = DataProcess::hidden_markov(p, gaussian_dictionary({-100.0, 0.0, 100.0}, 1.0));
  Sample x = proc.generate(100000, 4);
  const Eigen::Vector3d freq((x.array() < -50).cast<double>().mean(),
                             ((x.array() > -50) && (x.array() < 50)).cast<double>().mean(),
                             (x.array() > 50).cast<double>().mean());
  CHECK((freq - pi).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("minorization constant of the hidden chain") {
  CHECK(hmm_minorization(hmm_transition(), 1) == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(hmm_minorization(MatrixXd::Constant(4, 4, 0.25), 1) == doctest::Approx(1.0));
  CHECK(hmm_minorization(MatrixXd::Identity(2, 2), 3) == 0.0);
}

TEST_CASE("beta mixing bound") {
  CHECK(markov_beta_bound(1.0, 1, 5) == 0.0);
  CHECK(markov_beta_bound(0.5, 1, 2) == 1.0);
  CHECK(markov_beta_bound(0.5, 2, 4) == 1.0);
  CHECK_THROWS(markov_beta_bound(0.0, 1, 1));
}

TEST_CASE("AR dependence constants") {
  CHECK(ar_sigma_gamma(0.5, 1.0, 0.25).sigma == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(ar_sigma_gamma(0.5, 1.0, 0.25).gamma.has_value());
  const double expected = 2 * std::sqrt(0.5) / (1 - std::sqrt(0.5));
  CHECK(*ar_sigma_gamma(0.5, 1.0, 0.25, 0.5).gamma == doctest::Approx(expected).epsilon(1e-14));
  CHECK(*ar_sigma_gamma(0.5, 1.0, 0.25, 0.5).gamma == doctest::Approx(4.828).epsilon(1e-3));
  const auto limit = ar_sigma_gamma(0.0, 1.0, 0.25, 0.5);
  CHECK(limit.sigma == 0.0);
  CHECK(*limit.gamma == 0.0);
  CHECK(binary_half_ar_constants(1.0).sigma == 2.0);
  CHECK(ar_rho_bound(0.5, 1.0, 1.0, 3) == doctest::Approx(0.5));
  CHECK(binary_half_ar_rho_bound(1.0, 3) == 0.125);
}

TEST_CASE("rho estimates") {
  auto gauss = Kernel<double>::gaussian(1.0);
  auto laplace = Kernel<double>::laplace(1.0);
  auto iid = DataProcess::iid([](int count, Rng& r) { return standard_normal(count, 1, r); }, 1);
  for (int t : {1, 4, 8}) {
    const auto r = rho_hat(iid, gauss, t, 100, 200, 100 + t);
    CHECK(r.value >= 0.0);
    CHECK(r.value <= 4 * r.std_error);
    CHECK(r.n_pairs == 100L * (200 - t));
  }

  const auto binary = rho_hat(DataProcess::binary_half_ar(), gauss, 3, 100, 200, 5);
  CHECK(binary.value <= binary_half_ar_rho_bound(gauss.lipschitz(), 3) + 4 * binary.std_error);

  auto ar = DataProcess::gaussian_ar1(0.5);
  double previous = 1e300, previous_se = 0;
  for (int t : {1, 2, 4, 8}) {
    const auto r = rho_hat(ar, laplace, t, 100, 200, 200 + t);
    CHECK(r.value <= ar_rho_bound(0.5, laplace.lipschitz(), kMeanAbsNormal, t) + 4 * r.std_error);
    CHECK(r.value <= previous + 2 * std::hypot(r.std_error, previous_se));
    previous = r.value;
    previous_se = r.std_error;
  }

  CHECK_THROWS(rho_hat(iid, gauss, 0, 10, 10, 1));
  CHECK_THROWS(rho_hat(iid, gauss, 5, 10, 5, 1));
}

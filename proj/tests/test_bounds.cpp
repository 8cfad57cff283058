#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mmdest/bounds.hpp"
#include "mmdest/estimator.hpp"

using namespace mmdest;

namespace {

constexpr double kTol = 1e-12;
const double kInf = std::numeric_limits<double>::infinity();

// Cyclic Jacobi rotations: an eigenvalue oracle independent of Eigen's solvers.
std::vector<double> jacobi_eigenvalues(MatrixXd a) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  const VectorXd diag = a.diagonal();
  std::vector<double> out(diag.data(), diag.data() + n);
  std::sort(out.begin(), out.end());
  return out;
}

// Second, independent transcription of the Gaussian mean bound in its gamma = sigma sqrt(2d) form.
double gauss_bound_oracle(double sigma, int d, double eps, double n, double delta) {
  const double term = eps + (1 + std::sqrt(2 * std::log(1 / delta))) / std::sqrt(n);
  return -2 * sigma * sigma * (d + 2) * std::log(1 - 8 * std::numbers::e * term * term);
}

}  // namespace

TEST_CASE("expectation bound special cases") {
  CHECK(std::abs(bound_expectation(4, 0).value - 1.0) <= kTol);
  CHECK(std::abs(bound_expectation(1e4, 0).value - 0.02) <= kTol);
  CHECK(std::abs(bound_expectation(100, 2).value - 2 * std::sqrt(5.0 / 100)) <= kTol);
  CHECK(std::abs(bound_expectation(100, 2).value - 0.4472) <= 1e-4);
  CHECK_THROWS(bound_expectation(0, 0));
  CHECK_THROWS(bound_expectation(10, -1));
}

TEST_CASE("high-probability bound special cases") {
  for (double n : {1.0, 25.0, 1e6}) CHECK(std::abs(bound_highprob(n, 0, 0, 1).value - 2 / std::sqrt(n)) <= kTol);
  const double expected = 2 * (1 + std::sqrt(2 * std::log(20.0))) / 10;
  CHECK(std::abs(bound_highprob(100, 0, 0, 0.05).value - expected) <= kTol);
  CHECK(std::abs(bound_highprob(100, 0, 0, 0.05).value - 0.6894) <= 2e-4);
  CHECK_THROWS(bound_highprob(100, 0, 0, 0));
}

TEST_CASE("contamination bounds") {
  for (double n : {10.0, 400.0})
    CHECK(std::abs(bound_huber(n, 0.5, 0).value - bound_expectation(n, 0.5).value) <= kTol);
  CHECK(std::abs(bound_huber(kInf, 0, 0.1).value - 0.4) <= kTol);
  CHECK(std::abs(bound_huber(400, 0, 0.05).value - 0.3) <= kTol);
  CHECK(std::abs(bound_huber_hp(100, 0, 0, 0, 0.05).value - bound_highprob(100, 0, 0, 0.05).value) <= kTol);
  CHECK(std::abs(bound_huber_hp(100, 1, 2, 0.1, 0.05).value - (0.4 + bound_highprob(100, 1, 2, 0.05).value)) <= kTol);
  CHECK(std::abs(bound_adversarial(100, 0, 0).value - 0.4) <= kTol);
  CHECK(std::abs(bound_adversarial(1600, 0, 0.025).value - 0.2) <= kTol);
  for (double sigma : {0.0, 1.5})
    CHECK(std::abs(bound_adversarial(50, sigma, 0.1).value -
                   (bound_huber(50, sigma, 0.1).value + 2 * std::sqrt((1 + 2 * sigma) / 50))) <= kTol);
}

TEST_CASE("gaussian parameter bound") {
  CHECK(bound_gauss_param(1, 10, std::sqrt(20.0), 0, kInf, 0.05).value == 0.0);
  const auto vac = bound_gauss_param(1, 10, std::sqrt(20.0), 0.2, 500, 0.05);
  CHECK(vac.vacuous);
  CHECK(vac.value == kInf);
  const auto finite = bound_gauss_param(1, 10, std::sqrt(20.0), 0.01, 1e6, 0.5);
  CHECK_FALSE(finite.vacuous);
  CHECK(std::abs(finite.value - gauss_bound_oracle(1, 10, 0.01, 1e6, 0.5)) <= 1e-12 * finite.value);
  CHECK(finite.value > 0.0);
}

TEST_CASE("cauchy parameter bound") {
  CHECK(bound_cauchy_param(0, kInf, 0.5).value == 0.0);
  for (double n : {10.0, 1e6, 1e12}) {
    CHECK(bound_cauchy_param(0.2, n, 0.5).vacuous);
    CHECK(bound_cauchy_param(0.2, n, 0.5, CauchyConstant::K128).vacuous);
  }
  const double eps = 1e-4, n = 1e8, delta = 0.5;
  const double expansion = 512 * std::numbers::pi * (eps * eps + (2 + 4 * std::log(1 / delta)) / n);
  const double v = bound_cauchy_param(eps, n, delta, CauchyConstant::K128).value;
  CHECK(std::abs(v - expansion) <= 0.01 * expansion);
  const double v96 = bound_cauchy_param(eps, n, delta).value;
  CHECK(v96 == doctest::Approx(0.75 * v).epsilon(1e-3));
  CHECK_FALSE(bound_cauchy_param(eps, n, delta).note.empty());
}

TEST_CASE("hidden Markov bound") {
  for (double n : {1.0, 100.0, 5000.0}) CHECK(std::abs(bound_hmm(n, 1, 1).value - 2 / std::sqrt(n)) <= kTol);
  // c = 1/2, r = 1: (1 + 1 * 3.5) / (100 * 0.5) = 0.09.
  CHECK(std::abs(bound_hmm(100, 0.5, 1).value - 0.6) <= kTol);
  double previous = kInf;
  for (double n = 10; n <= 1e5; n *= 3) {
    CHECK(bound_hmm(n, 0.3, 2).value < previous);
    previous = bound_hmm(n, 0.3, 2).value;
  }
  CHECK(std::abs(bound_hmm_adversarial(100, 0.5, 1, 0.1).value - (0.4 + 1.2)) <= kTol);
  CHECK_THROWS(bound_hmm(100, 0, 1));
}

TEST_CASE("dictionary bound and Gram matrices") {
  const auto singular = bound_dictionary_param(100, 0.05, 0.0);
  CHECK(singular.vacuous);
  CHECK(singular.value == kInf);
  CHECK(min_eigenvalue(dictionary_gram(gaussian_dictionary({1.0, 1.0}, 1.0), 1.0)) == 0.0);
  CHECK(std::abs(bound_dictionary_param(100, 1, 0.5).value - 0.4) <= kTol);

  for (double gamma : {0.5, 1.0, 3.0}) {
    const double diag = std::sqrt(gamma * gamma / (4 + gamma * gamma));
    CHECK(std::abs(min_eigenvalue(dictionary_gram(gaussian_dictionary({0.0, 1e4}, 1.0), gamma)) - diag) <= kTol);
  }

  const auto dict = gaussian_dictionary({-3.72, 0.11, 4.54}, 1.0);
  const MatrixXd g = dictionary_gram(dict, 1.0);
  CHECK(std::abs(min_eigenvalue(g) - jacobi_eigenvalues(g).front()) <= 1e-12);

  Rng rng(1);
  const MatrixXd mc = dictionary_gram_monte_carlo(dict, Kernel<double>::gaussian(1.0), 3000, rng);
  CHECK((mc - g).cwiseAbs().maxCoeff() <= 0.01);
}

TEST_CASE("sgd bounds") {
  CHECK(std::abs(bound_sgd(1, 1, 100).value - 0.1) <= kTol);
  CHECK(bound_sgd(1, 1, 1e30).value <= 1e-14);
  CHECK(std::abs(bound_sgd_full(1, 1, 1e30, 100, 0).value - 0.3) <= 1e-7);
  for (int d : {3, 501}) {
    const double t = 250000;
    CHECK(std::abs(bound_sgd_dictionary(d, t).value - 2 * std::sqrt(d / t)) <= kTol);
    CHECK(std::abs(bound_sgd_dictionary(d, t).value - bound_sgd(1, 2 * std::sqrt(double(d)), t).value) <= kTol);
  }
}

TEST_CASE("bounds are monotone in their inputs") {
  const std::vector<double> ns{10, 50, 200, 1000, 1e4};
  const std::vector<double> levels{0.0, 0.05, 0.1, 0.2, 0.4};
  for (std::size_t i = 0; i + 1 < ns.size(); ++i)
    for (double s : levels) {
      const double n0 = ns[i], n1 = ns[i + 1];
      CHECK(bound_expectation(n1, s).value <= bound_expectation(n0, s).value);
      CHECK(bound_highprob(n1, s, s, 0.05).value <= bound_highprob(n0, s, s, 0.05).value);
      CHECK(bound_huber(n1, s, 0.1).value <= bound_huber(n0, s, 0.1).value);
      CHECK(bound_huber_hp(n1, s, s, 0.1, 0.05).value <= bound_huber_hp(n0, s, s, 0.1, 0.05).value);
      CHECK(bound_adversarial(n1, s, 0.1).value <= bound_adversarial(n0, s, 0.1).value);
      CHECK(bound_gauss_param(1, 2, 2, s / 10, n1, 0.05).value <= bound_gauss_param(1, 2, 2, s / 10, n0, 0.05).value);
      CHECK(bound_cauchy_param(s / 10, n1, 0.05).value <= bound_cauchy_param(s / 10, n0, 0.05).value);
    }
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    const double a = levels[i], b = levels[i + 1];
    CHECK(bound_expectation(100, a).value <= bound_expectation(100, b).value);
    CHECK(bound_highprob(100, a, 0, 0.05).value <= bound_highprob(100, b, 0, 0.05).value);
    CHECK(bound_highprob(100, 0, a, 0.05).value <= bound_highprob(100, 0, b, 0.05).value);
    CHECK(bound_huber(100, 0, a).value <= bound_huber(100, 0, b).value);
    CHECK(bound_huber(100, a, 0.1).value <= bound_huber(100, b, 0.1).value);
    CHECK(bound_huber_hp(100, 0, 0, a, 0.05).value <= bound_huber_hp(100, 0, 0, b, 0.05).value);
    CHECK(bound_adversarial(100, 0, a).value <= bound_adversarial(100, 0, b).value);
    CHECK(bound_gauss_param(1, 2, 2, a / 10, 1e5, 0.05).value <= bound_gauss_param(1, 2, 2, b / 10, 1e5, 0.05).value);
    CHECK(bound_cauchy_param(a / 10, 1e6, 0.05).value <= bound_cauchy_param(b / 10, 1e6, 0.05).value);
    CHECK(bound_hmm_adversarial(100, 0.5, 1, a).value <= bound_hmm_adversarial(100, 0.5, 1, b).value);
  }
}

TEST_CASE("reports flag uninformative and vacuous values") {
  const auto big = bound_expectation(0.5, 0);
  CHECK(big.uninformative);
  CHECK_FALSE(big.vacuous);
  CHECK_FALSE(bound_expectation(100, 0).uninformative);
  for (const auto& r : {bound_gauss_param(1, 10, 1, 0.4, 10, 0.05), bound_cauchy_param(0.3, 10, 0.05),
                        bound_dictionary_param(10, 0.05, -1e-3)}) {
    CHECK(r.vacuous);
    CHECK(r.value == kInf);
    CHECK(!std::isnan(r.value));
  }
  CHECK(to_string(BoundId::HiddenMarkov) == "hidden_markov");
}

TEST_CASE("the estimator's error stays inside the i.i.d. bounds") {
  const int n = 100, runs = 200;
  const double gamma = std::sqrt(2.0);
  auto k = Kernel<double>::gaussian(gamma);
  auto m = Model::gaussian_location(1.0, 1);
  const VectorXd truth = VectorXd::Zero(1);
  std::vector<double> dist;
  for (int r = 0; r < runs; ++r) {
    Rng rng(repetition_seed(5, r));
    Sample data = standard_normal(n, 1, rng);
    EstimatorConfig cfg;
    cfg.batch_size = n;
    cfg.steps = 300;
    cfg.seed = repetition_seed(6, r);
    const auto fit = psga(k, m, data, cfg);
    dist.push_back(std::sqrt(closed_form_gauss_mmd2(gamma, 1.0, 1, fit.theta_hat, truth)));
  }
  double mean = 0;
  for (double v : dist) mean += v / runs;
  std::sort(dist.begin(), dist.end());
  CHECK(mean <= bound_expectation(n, 0).value);
  CHECK(dist[static_cast<std::size_t>(std::ceil(0.95 * runs)) - 1] <= bound_highprob(n, 0, 0, 0.05).value);
}

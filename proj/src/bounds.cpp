#include "mmdest/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "mmdest/mmd.hpp"

namespace mmdest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMmdDiameter = 2.0;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_n(double n) { require(n > 0.0, "bound: n must be positive"); }
void check_delta(double delta) { require(delta > 0.0 && delta <= 1.0, "bound: delta must lie in (0, 1]"); }
void check_eps(double eps) { require(eps >= 0.0 && eps <= 1.0, "bound: eps must lie in [0, 1]"); }
void check_dependence(double sigma) { require(sigma >= 0.0, "bound: Sigma must be >= 0"); }

// sqrt(2 log(1/delta)); exactly zero at delta = 1.
double deviation(double delta) { return std::sqrt(2.0 * std::log(1.0 / delta)); }

BoundReport mmd_report(BoundId id, std::vector<std::pair<std::string, double>> inputs, double value) {
  BoundReport r{id, std::move(inputs), value, false, false, {}};
  if (!std::isfinite(value)) {
    r.value = kInf;
    r.vacuous = true;
  }
  r.uninformative = r.value > kMmdDiameter;
  return r;
}

BoundReport vacuous(BoundId id, std::vector<std::pair<std::string, double>> inputs, std::string note) {
  return {id, std::move(inputs), kInf, true, false, std::move(note)};
}

// 1 + (1-c)^{1/r-1}(3+c) over 1 - (1-c)^{1/r}; the dependence term vanishes when c = 1
// because every beta coefficient is then zero.
double hmm_ratio(double c, int r) {
  require(c > 0.0 && c <= 1.0, "hmm bound: c must lie in (0, 1]");
  require(r >= 1, "hmm bound: r must be >= 1");
  if (c == 1.0) return 1.0;
  const double q = 1.0 - c;
  return (1.0 + std::pow(q, 1.0 / r - 1.0) * (3.0 + c)) / (1.0 - std::pow(q, 1.0 / r));
}

}  // namespace

std::string to_string(BoundId id) {
  switch (id) {
    case BoundId::Expectation: return "expectation";
    case BoundId::HighProbability: return "high_probability";
    case BoundId::Huber: return "huber";
    case BoundId::HuberHighProbability: return "huber_high_probability";
    case BoundId::Adversarial: return "adversarial";
    case BoundId::GaussianParameter: return "gaussian_parameter";
    case BoundId::CauchyParameter: return "cauchy_parameter";
    case BoundId::HiddenMarkov: return "hidden_markov";
    case BoundId::HiddenMarkovAdversarial: return "hidden_markov_adversarial";
    case BoundId::DictionaryParameter: return "dictionary_parameter";
    case BoundId::Sgd: return "sgd";
    case BoundId::SgdExcess: return "sgd_excess";
    case BoundId::SgdDictionary: return "sgd_dictionary";
  }
  return "unknown";
}

BoundReport bound_expectation(double n, double sigma) {
  check_n(n);
  check_dependence(sigma);
  return mmd_report(BoundId::Expectation, {{"n", n}, {"Sigma", sigma}}, 2.0 * std::sqrt((1.0 + 2.0 * sigma) / n));
}

BoundReport bound_highprob(double n, double sigma, double gamma, double delta) {
  check_n(n);
  check_dependence(sigma);
  check_dependence(gamma);
  check_delta(delta);
  const double v = 2.0 * (std::sqrt(1.0 + 2.0 * sigma) + (1.0 + gamma) * deviation(delta)) / std::sqrt(n);
  return mmd_report(BoundId::HighProbability, {{"n", n}, {"Sigma", sigma}, {"Gamma", gamma}, {"delta", delta}}, v);
}

BoundReport bound_huber(double n, double sigma, double eps) {
  check_n(n);
  check_dependence(sigma);
  check_eps(eps);
  return mmd_report(BoundId::Huber, {{"n", n}, {"Sigma", sigma}, {"eps", eps}},
                    4.0 * eps + 2.0 * std::sqrt((1.0 + 2.0 * sigma) / n));
}

BoundReport bound_huber_hp(double n, double sigma, double gamma, double eps, double delta) {
  check_n(n);
  check_dependence(sigma);
  check_dependence(gamma);
  check_eps(eps);
  check_delta(delta);
  const double v = 2.0 * (2.0 * eps + (std::sqrt(1.0 + 2.0 * sigma) + (1.0 + gamma) * deviation(delta)) / std::sqrt(n));
  return mmd_report(BoundId::HuberHighProbability,
                    {{"n", n}, {"Sigma", sigma}, {"Gamma", gamma}, {"eps", eps}, {"delta", delta}}, v);
}

BoundReport bound_adversarial(double n, double sigma, double eps) {
  check_n(n);
  check_dependence(sigma);
  check_eps(eps);
  return mmd_report(BoundId::Adversarial, {{"n", n}, {"Sigma", sigma}, {"eps", eps}},
                    4.0 * eps + 4.0 * std::sqrt((1.0 + 2.0 * sigma) / n));
}

BoundReport bound_gauss_param(double sigma, int d, double gamma, double eps, double n, double delta) {
  require(sigma > 0.0 && gamma > 0.0 && d >= 1, "gaussian bound: need sigma, gamma > 0 and d >= 1");
  check_n(n);
  check_eps(eps);
  check_delta(delta);
  std::vector<std::pair<std::string, double>> inputs{{"sigma", sigma}, {"d", static_cast<double>(d)},
                                                     {"gamma", gamma}, {"eps", eps},
                                                     {"n", n},         {"delta", delta}};
  const double inner = eps + (1.0 + deviation(delta)) / std::sqrt(n);
  const double y = 8.0 * std::exp(2.0 * sigma * sigma * d / (gamma * gamma)) * inner * inner;
  if (!(y < 1.0)) return vacuous(BoundId::GaussianParameter, std::move(inputs), "log argument <= 0");
  const double v = -(4.0 * sigma * sigma + gamma * gamma) * std::log1p(-y) + 0.0;
  return {BoundId::GaussianParameter, std::move(inputs), v, false, false, {}};
}

BoundReport bound_cauchy_param(double eps, double n, double delta, CauchyConstant constant) {
  check_n(n);
  check_eps(eps);
  check_delta(delta);
  const double k = constant == CauchyConstant::K96 ? 96.0 : 128.0;
  std::vector<std::pair<std::string, double>> inputs{{"eps", eps}, {"n", n}, {"delta", delta}, {"K", k}};
  const double x = k * std::acos(-1.0) * (eps * eps + (2.0 + 4.0 * std::log(1.0 / delta)) / n);
  std::string note = constant == CauchyConstant::K96
                         ? "K = 96 (default); the alternative constant K = 128 is 4/3 larger near zero"
                         : "K = 128 (alternative constant); the default is K = 96";
  if (!(x < 1.0)) return vacuous(BoundId::CauchyParameter, std::move(inputs), note + "; K*pi*x >= 1");
  return {BoundId::CauchyParameter, std::move(inputs), 4.0 * x / (1.0 - x), false, false, std::move(note)};
}

BoundReport bound_hmm(double n, double c, int r) {
  check_n(n);
  return mmd_report(BoundId::HiddenMarkov, {{"n", n}, {"c", c}, {"r", static_cast<double>(r)}},
                    2.0 * std::sqrt(hmm_ratio(c, r) / n));
}

BoundReport bound_hmm_adversarial(double n, double c, int r, double eps) {
  check_n(n);
  check_eps(eps);
  return mmd_report(BoundId::HiddenMarkovAdversarial,
                    {{"n", n}, {"c", c}, {"r", static_cast<double>(r)}, {"eps", eps}},
                    4.0 * eps + 4.0 * std::sqrt(hmm_ratio(c, r) / n));
}

BoundReport bound_dictionary_param(double n, double delta, double lambda_min) {
  check_n(n);
  check_delta(delta);
  std::vector<std::pair<std::string, double>> inputs{{"n", n}, {"delta", delta}, {"lambda_min", lambda_min}};
  if (!(lambda_min > 0.0)) return vacuous(BoundId::DictionaryParameter, std::move(inputs), "singular Gram matrix");
  return {BoundId::DictionaryParameter, std::move(inputs), 2.0 * (1.0 + deviation(delta)) / (lambda_min * std::sqrt(n)),
          false, false, {}};
}

BoundReport bound_sgd(double diameter, double grad_bound, double steps) {
  require(diameter > 0.0 && grad_bound > 0.0 && steps >= 1.0, "sgd bound: need D, M > 0 and T >= 1");
  return {BoundId::Sgd, {{"D", diameter}, {"M", grad_bound}, {"T", steps}}, diameter * grad_bound / std::sqrt(steps),
          false, false, {}};
}

BoundReport bound_sgd_full(double diameter, double grad_bound, double steps, double n, double sigma) {
  check_n(n);
  check_dependence(sigma);
  const double opt = bound_sgd(diameter, grad_bound, steps).value;
  return mmd_report(BoundId::SgdExcess,
                    {{"D", diameter}, {"M", grad_bound}, {"T", steps}, {"n", n}, {"Sigma", sigma}},
                    3.0 * std::sqrt((1.0 + 2.0 * sigma) / n) + std::sqrt(opt));
}

BoundReport bound_sgd_dictionary(int components, double steps) {
  require(components >= 1 && steps >= 1.0, "sgd dictionary bound: need D >= 1 and T >= 1");
  return {BoundId::SgdDictionary, {{"D", static_cast<double>(components)}, {"T", steps}},
          2.0 * std::sqrt(components / steps), false, false, {}};
}

MatrixXd dictionary_gram(const DictionaryMixture& dict, double gamma) {
  const Eigen::Index n = dict.means.rows();
  const int d = static_cast<int>(dict.means.cols());
  MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double var = dict.sigmas(i) * dict.sigmas(i) + dict.sigmas(j) * dict.sigmas(j);
      g(i, j) = gauss_kernel_expectation(gamma, var, d, (dict.means.row(i) - dict.means.row(j)).squaredNorm());
    }
  return g;
}

MatrixXd dictionary_gram_monte_carlo(const DictionaryMixture& dict, const Kernel<double>& k, int draws, Rng& rng) {
  require(draws >= 1, "dictionary_gram_monte_carlo: draws must be >= 1");
  const Eigen::Index n = dict.means.rows();
  const Eigen::Index d = dict.means.cols();
  std::vector<MatrixXd> first(n), second(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    first[i] = (dict.sigmas(i) * standard_normal(draws, d, rng)).rowwise() + dict.means.row(i);
    second[i] = (dict.sigmas(i) * standard_normal(draws, d, rng)).rowwise() + dict.means.row(i);
  }
  MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = gram(k, first[i], second[j]).mean();
  return 0.5 * (g + g.transpose());
}

double min_eigenvalue(const MatrixXd& symmetric) {
  require(symmetric.rows() == symmetric.cols() && symmetric.rows() > 0, "min_eigenvalue: square matrix required");
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  const double smallest = solver.eigenvalues()(0);
  const double scale = solver.eigenvalues().cwiseAbs().maxCoeff();
  return std::abs(smallest) <= 1e-12 * scale ? 0.0 : smallest;
}

}  // namespace mmdest

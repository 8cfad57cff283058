#include "mmdest/contamination.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmdest/errors.hpp"

namespace mmdest {

ContaminationSpec ContaminationSpec::huber(double epsilon, Sampler q) {
  ContaminationSpec s;
  s.kind = ContaminationKind::Huber;
  s.epsilon = epsilon;
  s.q = std::move(q);
  return s;
}

ContaminationSpec ContaminationSpec::adversarial_dirac(double epsilon, VectorXd at) {
  ContaminationSpec s;
  s.kind = ContaminationKind::Adversarial;
  s.epsilon = epsilon;
  s.attack = AttackKind::DiracAt;
  s.point = std::move(at);
  return s;
}

ContaminationSpec ContaminationSpec::adversarial_sampler(double epsilon, Sampler q) {
  ContaminationSpec s;
  s.kind = ContaminationKind::Adversarial;
  s.epsilon = epsilon;
  s.attack = AttackKind::SamplerQ;
  s.q = std::move(q);
  return s;
}

ContaminationSpec ContaminationSpec::worst_case_sphere(double epsilon, VectorXd theta0) {
  ContaminationSpec s;
  s.kind = ContaminationKind::Adversarial;
  s.epsilon = epsilon;
  s.attack = AttackKind::WorstCaseSphere;
  s.point = std::move(theta0);
  return s;
}

void ContaminationSpec::validate() const {
  if (kind == ContaminationKind::None) return;
  if (!(epsilon >= 0.0) || !(epsilon < 0.5)) throw ConfigError("contamination: epsilon must lie in [0, 1/2)");
  const bool needs_q = kind == ContaminationKind::Huber || attack == AttackKind::SamplerQ;
  if (needs_q && !q) throw ConfigError("contamination: missing Q sampler");
  if (!needs_q && point.size() == 0) throw ConfigError("contamination: missing attack point");
}

namespace {

void check_shape(const MatrixXd& values, Eigen::Index rows, Eigen::Index cols) {
  if (values.rows() != rows || values.cols() != cols) throw std::runtime_error("contamination sampler: wrong shape");
}

}  // namespace

Contaminated contaminate(const Sample& clean, const ContaminationSpec& spec, Rng& rng) {
  spec.validate();
  Contaminated out{clean, {}};
  const auto n = static_cast<int>(clean.rows());
  const auto d = clean.cols();
  if (spec.kind == ContaminationKind::None || spec.epsilon == 0.0) return out;

  if (spec.kind == ContaminationKind::Huber) {
    std::bernoulli_distribution flip(spec.epsilon);
    for (int i = 0; i < n; ++i)
      if (flip(rng)) out.outliers.push_back(i);
    const MatrixXd values = spec.q(static_cast<int>(out.outliers.size()), rng);
    check_shape(values, static_cast<Eigen::Index>(out.outliers.size()), d);
    for (std::size_t j = 0; j < out.outliers.size(); ++j) out.data.row(out.outliers[j]) = values.row(j);
    return out;
  }

  const int count = static_cast<int>(std::floor(spec.epsilon * n + 1e-9));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(count);

  MatrixXd values;
  switch (spec.attack) {
    case AttackKind::SamplerQ:
      values = spec.q(count, rng);
      break;
    case AttackKind::DiracAt:
      if (spec.point.size() != d) throw std::invalid_argument("contaminate: attack point dimension");
      values = spec.point.transpose().replicate(count, 1);
      break;
    case AttackKind::WorstCaseSphere:
      if (spec.point.size() != d) throw std::invalid_argument("contaminate: theta0 dimension");
      values = (spec.point.array() + 1.0).matrix().transpose().replicate(count, 1);
      break;
  }
  check_shape(values, count, d);
  for (int j = 0; j < count; ++j) out.data.row(order[j]) = values.row(j);
  out.outliers = order;
  std::sort(out.outliers.begin(), out.outliers.end());
  return out;
}

Sampler shifted_gaussian(double a, int d) {
  return [a, d](int count, Rng& rng) -> MatrixXd { return (standard_normal(count, d, rng).array() + a).matrix(); };
}

Sampler coordinatewise_cauchy(double location, int d) {
  return [location, d](int count, Rng& rng) -> MatrixXd {
    MatrixXd out(count, d);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < d; ++j) out(i, j) = location + std::tan(pi * (uniform01(rng) - 0.5));
    return out;
  };
}

Sampler dirac(double a, int d) {
  return [a, d](int count, Rng&) -> MatrixXd { return MatrixXd::Constant(count, d, a); };
}

const std::vector<std::string>& table1_contaminations() {
  static const std::vector<std::string> names{"N(0.2)", "N(0.5)", "N(1)",     "N(5)",
                                              "N(10)",  "C(0.5)", "delta(1)", "delta(10)"};
  return names;
}

Sampler table1_contamination(const std::string& name, int d) {
  if (name == "N(0.2)") return shifted_gaussian(0.2, d);
  if (name == "N(0.5)") return shifted_gaussian(0.5, d);
  if (name == "N(1)") return shifted_gaussian(1.0, d);
  if (name == "N(5)") return shifted_gaussian(5.0, d);
  if (name == "N(10)") return shifted_gaussian(10.0, d);
  if (name == "C(0.5)") return coordinatewise_cauchy(0.5, d);
  if (name == "delta(1)") return dirac(1.0, d);
  if (name == "delta(10)") return dirac(10.0, d);
  throw ConfigError("unknown contamination distribution: " + name);
}

}  // namespace mmdest

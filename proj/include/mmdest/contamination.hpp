#pragma once

#include <string>
#include <vector>

#include "mmdest/mmd.hpp"
#include "mmdest/random.hpp"

namespace mmdest {

enum class ContaminationKind { None, Huber, Adversarial };
enum class AttackKind { DiracAt, SamplerQ, WorstCaseSphere };

/// How a clean sample is corrupted.
///
/// Huber: each point is independently replaced with probability epsilon by a draw from Q,
/// so the number of outliers is Binomial(n, epsilon).
/// Adversarial: exactly floor(epsilon n) points, chosen uniformly at random, are replaced
/// by the attack values (a point mass, draws from Q, or the point theta0 + 1).
struct ContaminationSpec {
  ContaminationKind kind = ContaminationKind::None;
  double epsilon = 0.0;
  AttackKind attack = AttackKind::SamplerQ;
  Sampler q;        // Huber and SamplerQ
  VectorXd point;   // DiracAt location, or theta0 for WorstCaseSphere

  static ContaminationSpec none() { return {}; }
  static ContaminationSpec huber(double epsilon, Sampler q);
  static ContaminationSpec adversarial_dirac(double epsilon, VectorXd at);
  static ContaminationSpec adversarial_sampler(double epsilon, Sampler q);
  static ContaminationSpec worst_case_sphere(double epsilon, VectorXd theta0);

  void validate() const;
};

struct Contaminated {
  Sample data;
  std::vector<int> outliers;  // replaced indices, ascending; for diagnostics only
};

/// Applies the contamination. Points outside the outlier set are copied unchanged.
///
/// Adversarial replacement shuffles the indices and replaces the first floor(epsilon n),
/// drawing Q values in that order, so with a fixed generator state the outlier sets and
/// values are nested across epsilon.
Contaminated contaminate(const Sample& clean, const ContaminationSpec& spec, Rng& rng);

/// N(a 1, I_d).
Sampler shifted_gaussian(double a, int d);
/// Independent coordinates C(location, 1).
Sampler coordinatewise_cauchy(double location, int d);
/// Point mass at a 1.
Sampler dirac(double a, int d);

/// Contamination distributions of the Gaussian-mean study, by name:
/// "N(0.2)", "N(0.5)", "N(1)", "N(5)", "N(10)", "C(0.5)", "delta(1)", "delta(10)".
const std::vector<std::string>& table1_contaminations();
Sampler table1_contamination(const std::string& name, int d);

}  // namespace mmdest

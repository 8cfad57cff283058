#pragma once

#include <string>
#include <variant>
#include <vector>

#include "mmdest/kernels.hpp"
#include "mmdest/mmd.hpp"
#include "mmdest/random.hpp"

namespace mmdest {

enum class SpaceKind { Euclidean, Simplex, Box };

/// Closed convex parameter set Theta.
struct ParamSpace {
  SpaceKind kind = SpaceKind::Euclidean;
  int dim = 1;
  double lo = 0.0;
  double hi = 0.0;

  static ParamSpace euclidean(int p) { return {SpaceKind::Euclidean, p, 0.0, 0.0}; }
  static ParamSpace simplex(int p) { return {SpaceKind::Simplex, p, 0.0, 0.0}; }
  static ParamSpace box(int p, double lo, double hi);

  bool contains(const VectorXd& v, double tol = 1e-9) const;
};

/// Euclidean projection of v onto the probability simplex (sort-based, O(D log D)).
VectorXd project_simplex(const VectorXd& v);

/// Orthogonal projection onto the parameter space.
VectorXd project(const ParamSpace& space, const VectorXd& v);

/// N(theta, sigma^2 I_d), theta in R^d.
struct GaussianLocation {
  double sigma = 1.0;
  int dim = 1;
};

/// Cauchy C(theta, 1) on the real line.
struct CauchyLocation {};

/// U[theta - 1/2, theta + 1/2] on the real line.
struct UniformTranslation {};

/// sum_l theta_l N(mean_l, sigma_l^2 I_d) with known components, theta on the simplex.
struct DictionaryMixture {
  MatrixXd means;  // D x d
  VectorXd sigmas; // D
};

/// Gaussian dictionary with means lo, lo + step, ..., hi (1-d) and a common variance.
DictionaryMixture gaussian_dictionary(double mean_lo, double mean_hi, double step, double variance);
DictionaryMixture gaussian_dictionary(const std::vector<double>& means, double variance);

/// Parametric family {P_theta} usable as a generative model.
class Model {
 public:
  using Family = std::variant<GaussianLocation, CauchyLocation, UniformTranslation, DictionaryMixture>;

  explicit Model(Family family);
  Model(Family family, ParamSpace space);

  static Model gaussian_location(double sigma, int d) { return Model(GaussianLocation{sigma, d}); }
  static Model cauchy_location() { return Model(CauchyLocation{}); }
  static Model uniform_translation() { return Model(UniformTranslation{}); }
  static Model dictionary_mixture(DictionaryMixture dict) { return Model(std::move(dict)); }

  const Family& family() const { return family_; }
  const ParamSpace& space() const { return space_; }
  std::string name() const;

  int data_dim() const;
  int param_dim() const { return space_.dim; }
  bool has_score() const { return !std::holds_alternative<UniformTranslation>(family_); }
  bool is_location() const { return !std::holds_alternative<DictionaryMixture>(family_); }

  /// `count` i.i.d. draws from P_theta.
  Sample sample(const VectorXd& theta, int count, Rng& rng) const;

  double density(const VectorXd& theta, const VectorXd& x) const;
  double log_density(const VectorXd& theta, const VectorXd& x) const;
  /// Densities at every row of z.
  VectorXd density(const VectorXd& theta, const Sample& z) const;

  /// grad_theta log p_theta(x).
  VectorXd grad_log_density(const VectorXd& theta, const VectorXd& x) const;
  /// Scores of every row of y, one row per point (M x p).
  MatrixXd grad_log_density(const VectorXd& theta, const Sample& y) const;

 private:
  void check_theta(const VectorXd& theta) const;

  Family family_;
  ParamSpace space_;
};

/// Exact gradient of the uniform translation criterion:
/// -(2/n) sum_i [K(theta + 1/2 - X_i) - K(theta - 1/2 - X_i)].
double exact_uniform_gradient(const Kernel<double>& k, double theta, const Sample& data);

}  // namespace mmdest

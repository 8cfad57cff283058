#include "mmdest/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "mmdest/errors.hpp"

namespace mmdest {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

ParamSpace default_space(const Model::Family& family) {
  return std::visit(overloaded{
                        [](const GaussianLocation& g) { return ParamSpace::euclidean(g.dim); },
                        [](const CauchyLocation&) { return ParamSpace::euclidean(1); },
                        [](const UniformTranslation&) { return ParamSpace::euclidean(1); },
                        [](const DictionaryMixture& m) { return ParamSpace::simplex(static_cast<int>(m.means.rows())); },
                    },
                    family);
}

// log Phi_l(y) for every row of y and every component: M x D.
MatrixXd component_log_densities(const DictionaryMixture& mix, const Sample& y) {
  const MatrixXd d2 = squared_distances<double>(y, mix.means);
  const double d = static_cast<double>(mix.means.cols());
  MatrixXd out(d2.rows(), d2.cols());
  for (Eigen::Index l = 0; l < d2.cols(); ++l) {
    const double s2 = mix.sigmas(l) * mix.sigmas(l);
    out.col(l) = (d2.col(l).array() * (-0.5 / s2) - 0.5 * d * (kLogTwoPi + std::log(s2))).matrix();
  }
  return out;
}

// log sum_l theta_l Phi_l(y) per row, computed with log-sum-exp.
VectorXd mixture_log_density(const VectorXd& theta, const MatrixXd& log_phi) {
  const VectorXd log_theta = theta.cwiseMax(0.0).array().log().matrix();
  MatrixXd a = log_phi;
  a.rowwise() += log_theta.transpose();
  VectorXd top = a.rowwise().maxCoeff();
  for (Eigen::Index j = 0; j < top.size(); ++j)
    if (!std::isfinite(top(j))) top(j) = 0.0;
  a.colwise() -= top;
  return (top.array() + a.array().exp().rowwise().sum().log()).matrix();
}

}  // namespace

ParamSpace ParamSpace::box(int p, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("box parameter space needs lo <= hi");
  return {SpaceKind::Box, p, lo, hi};
}

bool ParamSpace::contains(const VectorXd& v, double tol) const {
  if (v.size() != dim || !v.allFinite()) return false;
  switch (kind) {
    case SpaceKind::Euclidean:
      return true;
    case SpaceKind::Box:
      return (v.array() >= lo - tol).all() && (v.array() <= hi + tol).all();
    case SpaceKind::Simplex:
      return (v.array() >= -tol).all() && std::abs(v.sum() - 1.0) <= tol;
  }
  return false;
}

VectorXd project_simplex(const VectorXd& v) {
  if (v.size() == 0) throw std::invalid_argument("project_simplex: empty vector");
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) tau = candidate;
  }
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

VectorXd project(const ParamSpace& space, const VectorXd& v) {
  if (v.size() != space.dim) throw std::invalid_argument("project: dimension mismatch");
  switch (space.kind) {
    case SpaceKind::Euclidean:
      return v;
    case SpaceKind::Box:
      return v.cwiseMax(space.lo).cwiseMin(space.hi);
    case SpaceKind::Simplex:
      return project_simplex(v);
  }
  return v;
}

DictionaryMixture gaussian_dictionary(double mean_lo, double mean_hi, double step, double variance) {
  if (!(step > 0.0) || mean_hi < mean_lo) throw ConfigError("dictionary needs step > 0 and mean_hi >= mean_lo");
  const auto count = static_cast<int>(std::llround((mean_hi - mean_lo) / step)) + 1;
  std::vector<double> means(count);
  for (int l = 0; l < count; ++l) means[l] = mean_lo + step * l;
  return gaussian_dictionary(means, variance);
}

DictionaryMixture gaussian_dictionary(const std::vector<double>& means, double variance) {
  if (means.empty()) throw ConfigError("dictionary needs at least one component");
  if (!(variance > 0.0)) throw ConfigError("dictionary variance must be positive");
  DictionaryMixture mix;
  mix.means = Eigen::Map<const VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
  mix.sigmas = VectorXd::Constant(static_cast<Eigen::Index>(means.size()), std::sqrt(variance));
  return mix;
}

Model::Model(Family family) : Model(family, default_space(family)) {}

Model::Model(Family family, ParamSpace space) : family_(std::move(family)), space_(space) {
  std::visit(overloaded{
                 [](const GaussianLocation& g) {
                   if (!(g.sigma > 0.0) || g.dim < 1) throw ConfigError("gaussian location needs sigma > 0, d >= 1");
                 },
                 [](const CauchyLocation&) {},
                 [](const UniformTranslation&) {},
                 [](const DictionaryMixture& m) {
                   if (m.means.rows() < 1 || m.sigmas.size() != m.means.rows() || (m.sigmas.array() <= 0.0).any())
                     throw ConfigError("malformed dictionary mixture");
                 },
             },
             family_);
  if (space_.dim != default_space(family_).dim) throw ConfigError("parameter space dimension does not match model");
}

std::string Model::name() const {
  return std::visit(overloaded{
                        [](const GaussianLocation&) { return std::string("gaussian"); },
                        [](const CauchyLocation&) { return std::string("cauchy"); },
                        [](const UniformTranslation&) { return std::string("uniform"); },
                        [](const DictionaryMixture&) { return std::string("mixture"); },
                    },
                    family_);
}

int Model::data_dim() const {
  return std::visit(overloaded{
                        [](const GaussianLocation& g) { return g.dim; },
                        [](const CauchyLocation&) { return 1; },
                        [](const UniformTranslation&) { return 1; },
                        [](const DictionaryMixture& m) { return static_cast<int>(m.means.cols()); },
                    },
                    family_);
}

void Model::check_theta(const VectorXd& theta) const {
  if (!space_.contains(theta)) throw std::invalid_argument("parameter outside the model's parameter space");
}

Sample Model::sample(const VectorXd& theta, int count, Rng& rng) const {
  check_theta(theta);
  if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
  return std::visit(
      overloaded{
          [&](const GaussianLocation& g) -> Sample {
            Sample s = g.sigma * standard_normal(count, g.dim, rng);
            s.rowwise() += theta.transpose();
            return s;
          },
          [&](const CauchyLocation&) -> Sample {
            Sample s(count, 1);
            for (int i = 0; i < count; ++i) s(i, 0) = theta(0) + std::tan(std::numbers::pi * (uniform01(rng) - 0.5));
            return s;
          },
          [&](const UniformTranslation&) -> Sample {
            Sample s(count, 1);
            for (int i = 0; i < count; ++i) s(i, 0) = theta(0) + uniform01(rng) - 0.5;
            return s;
          },
          [&](const DictionaryMixture& m) -> Sample {
            const VectorXd w = theta.cwiseMax(0.0);
            std::discrete_distribution<int> pick(w.data(), w.data() + w.size());
            std::normal_distribution<double> normal(0.0, 1.0);
            Sample s(count, m.means.cols());
            for (int i = 0; i < count; ++i) {
              const int l = pick(rng);
              for (Eigen::Index c = 0; c < m.means.cols(); ++c) s(i, c) = m.means(l, c) + m.sigmas(l) * normal(rng);
            }
            return s;
          },
      },
      family_);
}

double Model::log_density(const VectorXd& theta, const VectorXd& x) const {
  if (x.size() != data_dim()) throw std::invalid_argument("log_density: dimension mismatch");
  return std::visit(overloaded{
                        [&](const GaussianLocation& g) {
                          const double s2 = g.sigma * g.sigma;
                          return -0.5 * (x - theta).squaredNorm() / s2 - 0.5 * g.dim * (kLogTwoPi + std::log(s2));
                        },
                        [&](const CauchyLocation&) {
                          const double u = x(0) - theta(0);
                          return -std::log(std::numbers::pi * (1.0 + u * u));
                        },
                        [&](const UniformTranslation&) {
                          return std::abs(x(0) - theta(0)) <= 0.5 ? 0.0 : -std::numeric_limits<double>::infinity();
                        },
                        [&](const DictionaryMixture& m) {
                          const Sample row = x.transpose();
                          return mixture_log_density(theta, component_log_densities(m, row))(0);
                        },
                    },
                    family_);
}

double Model::density(const VectorXd& theta, const VectorXd& x) const { return std::exp(log_density(theta, x)); }

VectorXd Model::density(const VectorXd& theta, const Sample& z) const {
  if (z.cols() != data_dim()) throw std::invalid_argument("density: dimension mismatch");
  if (const auto* m = std::get_if<DictionaryMixture>(&family_)) {
    return mixture_log_density(theta, component_log_densities(*m, z)).array().exp().matrix();
  }
  VectorXd out(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) out(i) = density(theta, VectorXd(z.row(i).transpose()));
  return out;
}

VectorXd Model::grad_log_density(const VectorXd& theta, const VectorXd& x) const {
  const Sample row = x.transpose();
  return grad_log_density(theta, row).row(0).transpose();
}

MatrixXd Model::grad_log_density(const VectorXd& theta, const Sample& y) const {
  if (y.cols() != data_dim()) throw std::invalid_argument("grad_log_density: dimension mismatch");
  if (theta.size() != param_dim()) throw std::invalid_argument("grad_log_density: parameter dimension mismatch");
  return std::visit(
      overloaded{
          [&](const GaussianLocation& g) -> MatrixXd {
            MatrixXd out = y;
            out.rowwise() -= theta.transpose();
            return out / (g.sigma * g.sigma);
          },
          [&](const CauchyLocation&) -> MatrixXd {
            const auto u = y.col(0).array() - theta(0);
            return (2.0 * u / (1.0 + u * u)).matrix();
          },
          [&](const UniformTranslation&) -> MatrixXd {
            throw UnsupportedOperation("uniform translation model has no score; use the exact gradient");
          },
          [&](const DictionaryMixture& m) -> MatrixXd {
            // Phi_l(y) / p(y) = e_l / (e . theta) with e_l = exp(log Phi_l(y) - max_l log Phi_l(y)).
            MatrixXd out = component_log_densities(m, y);
            const VectorXd top = out.rowwise().maxCoeff();
            out.colwise() -= top;
            out.array() = out.array().exp();
            const VectorXd q = out * theta.cwiseMax(0.0);
            for (Eigen::Index j = 0; j < out.rows(); ++j) {
              if (q(j) > 1e-280) {
                out.row(j) /= q(j);
                continue;
              }
              // Every weighted component underflows relative to the nearest one: redo the row in logs.
              const MatrixXd log_phi = component_log_densities(m, y.row(j));
              const double log_p = mixture_log_density(theta, log_phi)(0);
              if (!std::isfinite(log_p)) throw DegenerateDensity("point has zero density under the mixture");
              out.row(j) = (log_phi.row(0).array() - log_p).exp();
            }
            return out;
          },
      },
      family_);
}

double exact_uniform_gradient(const Kernel<double>& k, double theta, const Sample& data) {
  if (data.cols() != 1) throw std::invalid_argument("exact_uniform_gradient needs 1-d data");
  if (data.rows() == 0) throw std::invalid_argument("exact_uniform_gradient: empty data");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    acc += k.profile(theta + 0.5 - data(i, 0)) - k.profile(theta - 0.5 - data(i, 0));
  }
  return -2.0 * acc / static_cast<double>(data.rows());
}

}  // namespace mmdest

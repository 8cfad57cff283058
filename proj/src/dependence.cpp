#include "mmdest/dependence.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "mmdest/errors.hpp"

namespace mmdest {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate(const VectorAR& ar) {
  if (ar.A.rows() == 0 || ar.A.rows() != ar.A.cols()) throw ConfigError("AR process: A must be square");
  if (!ar.noise) throw ConfigError("AR process: missing noise sampler");
  if (ar.burn_in < 0) throw ConfigError("AR process: burn_in must be >= 0");
  const double norm = operator_norm(ar.A);
  if (!(norm < 1.0)) {
    std::ostringstream msg;
    msg << "AR process: operator norm " << norm << " is not below 1";
    throw ConfigError(msg.str());
  }
}

void validate(const HiddenMarkov& hmm) {
  const MatrixXd& p = hmm.transition;
  if (p.rows() == 0 || p.rows() != p.cols()) throw ConfigError("hidden Markov: transition matrix must be square");
  if ((p.array() < 0.0).any()) throw ConfigError("hidden Markov: negative transition probability");
  if (((p.rowwise().sum().array() - 1.0).abs() > 1e-9).any()) throw ConfigError("hidden Markov: rows must sum to 1");
  if (hmm.emissions.means.rows() != p.rows()) throw ConfigError("hidden Markov: one emission per state required");
}

}  // namespace

DataProcess::DataProcess(Kind kind) : kind_(std::move(kind)) {
  std::visit(overloaded{
                 [](const IidProcess& p) {
                   if (!p.draw || p.dim < 1) throw ConfigError("iid process: missing sampler or dimension");
                 },
                 [](const VectorAR& p) { validate(p); },
                 [](const BinaryHalfAR& p) {
                   if (p.burn_in < 0) throw ConfigError("binary AR: burn_in must be >= 0");
                 },
                 [](const HiddenMarkov& p) { validate(p); },
             },
             kind_);
}

DataProcess DataProcess::gaussian_ar1(double a, double noise_sd, int burn_in) {
  Sampler noise = [noise_sd](int count, Rng& rng) -> MatrixXd { return noise_sd * standard_normal(count, 1, rng); };
  return vector_ar(MatrixXd::Constant(1, 1, a), std::move(noise), burn_in);
}

int DataProcess::dim() const {
  return std::visit(overloaded{
                        [](const IidProcess& p) { return p.dim; },
                        [](const VectorAR& p) { return static_cast<int>(p.A.rows()); },
                        [](const BinaryHalfAR&) { return 1; },
                        [](const HiddenMarkov& p) { return static_cast<int>(p.emissions.means.cols()); },
                    },
                    kind_);
}

std::string DataProcess::name() const {
  return std::visit(overloaded{
                        [](const IidProcess&) { return std::string("iid"); },
                        [](const VectorAR&) { return std::string("ar"); },
                        [](const BinaryHalfAR&) { return std::string("binary_half_ar"); },
                        [](const HiddenMarkov&) { return std::string("hmm"); },
                    },
                    kind_);
}

Sample DataProcess::generate(int n, Rng& rng) const {
  if (n < 1) throw std::invalid_argument("generate: n must be >= 1");
  return std::visit(
      overloaded{
          [&](const IidProcess& p) -> Sample {
            Sample out = p.draw(n, rng);
            if (out.rows() != n || out.cols() != p.dim) throw std::runtime_error("iid sampler returned wrong shape");
            return out;
          },
          [&](const VectorAR& p) -> Sample {
            const Eigen::Index d = p.A.rows();
            const MatrixXd eps = p.noise(p.burn_in + n, rng);
            VectorXd x = VectorXd::Zero(d);
            for (int t = 0; t < p.burn_in; ++t) x = p.A * x + eps.row(t).transpose();
            Sample out(n, d);
            for (int t = 0; t < n; ++t) {
              x = p.A * x + eps.row(p.burn_in + t).transpose();
              out.row(t) = x.transpose();
            }
            return out;
          },
          [&](const BinaryHalfAR& p) -> Sample {
            std::bernoulli_distribution coin(0.5);
            double x = uniform01(rng);
            for (int t = 0; t < p.burn_in; ++t) x = 0.5 * (x + (coin(rng) ? 1.0 : 0.0));
            Sample out(n, 1);
            for (int t = 0; t < n; ++t) {
              x = 0.5 * (x + (coin(rng) ? 1.0 : 0.0));
              out(t, 0) = x;
            }
            return out;
          },
          [&](const HiddenMarkov& p) -> Sample {
            const VectorXd pi = stationary_distribution(p.transition);
            const Eigen::Index states = p.transition.rows();
            std::vector<std::discrete_distribution<int>> rows;
            rows.reserve(states);
            for (Eigen::Index i = 0; i < states; ++i) {
              const std::vector<double> w(p.transition.row(i).begin(), p.transition.row(i).end());
              rows.emplace_back(w.begin(), w.end());
            }
            const std::vector<double> pw(pi.data(), pi.data() + pi.size());
            int state = std::discrete_distribution<int>(pw.begin(), pw.end())(rng);
            const Eigen::Index d = p.emissions.means.cols();
            std::normal_distribution<double> normal(0.0, 1.0);
            Sample out(n, d);
            for (int t = 0; t < n; ++t) {
              if (t > 0) state = rows[state](rng);
              for (Eigen::Index c = 0; c < d; ++c)
                out(t, c) = p.emissions.means(state, c) + p.emissions.sigmas(state) * normal(rng);
            }
            return out;
          },
      },
      kind_);
}

double operator_norm(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<MatrixXd>(a).singularValues()(0);
}

VectorXd stationary_distribution(const MatrixXd& transition, double tol, int max_iter) {
  const Eigen::Index d = transition.rows();
  VectorXd pi = VectorXd::Constant(d, 1.0 / static_cast<double>(d));
  const MatrixXd pt = transition.transpose();
  // Lazy chain (I + P) / 2 has the same stationary law and is aperiodic.
  for (int it = 0; it < max_iter; ++it) {
    VectorXd next = 0.5 * (pi + pt * pi);
    next /= next.sum();
    const double moved = (next - pi).lpNorm<1>();
    pi = next;
    if (moved < tol) break;
  }
  return pi;
}

double hmm_minorization(const MatrixXd& transition, int r) {
  if (r < 0) throw std::invalid_argument("hmm_minorization: r must be >= 0");
  MatrixXd power = MatrixXd::Identity(transition.rows(), transition.cols());
  for (int i = 0; i < r; ++i) power = power * transition;
  return static_cast<double>(transition.rows()) * power.minCoeff();
}

RhoEstimate rho_hat(const DataProcess& process, const Kernel<double>& k, int t, int n_traj, int traj_len,
                    std::uint64_t seed) {
  if (t < 1) throw std::invalid_argument("rho_hat: lag must be >= 1");
  if (traj_len <= t) throw std::invalid_argument("rho_hat: trajectory must be longer than the lag");
  if (n_traj < 2) throw std::invalid_argument("rho_hat: need at least two replications");
  Rng rng(seed);
  std::vector<double> diffs(n_traj);
  for (int r = 0; r < n_traj; ++r) {
    const Sample x = process.generate(traj_len, rng);
    const Sample x_indep = process.generate(traj_len, rng);
    double lag = 0.0;
    for (int s = 0; s + t < traj_len; ++s) lag += k(x.row(s), x.row(s + t));
    lag /= static_cast<double>(traj_len - t);
    double cross = 0.0;
    for (int s = 0; s < traj_len; ++s) cross += k(x.row(s), x_indep.row(s));
    cross /= static_cast<double>(traj_len);
    diffs[r] = lag - cross;
  }
  // Plain index-order sums: a vectorized reduction over an arbitrarily aligned buffer would make
  // the last bits depend on the allocation.
  double total = 0.0;
  for (double v : diffs) total += v;
  const double mean = total / static_cast<double>(n_traj);
  double ss = 0.0;
  for (double v : diffs) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(n_traj - 1);
  RhoEstimate out;
  out.t = t;
  out.signed_value = mean;
  out.value = std::abs(mean);
  out.std_error = std::sqrt(var / static_cast<double>(n_traj));
  out.n_pairs = static_cast<long>(n_traj) * (traj_len - t);
  return out;
}

namespace {
void check_ar_norm(double a_norm) {
  if (!(a_norm >= 0.0) || !(a_norm < 1.0)) throw ConfigError("AR constants need 0 <= ||A|| < 1");
}
}  // namespace

double ar_rho_bound(double a_norm, double lipschitz, double mean_noise_norm, int t) {
  check_ar_norm(a_norm);
  return std::pow(a_norm, t) * 2.0 * lipschitz * mean_noise_norm / (1.0 - a_norm);
}

DependenceConstants ar_sigma_gamma(double a_norm, double lipschitz, double mean_noise_norm,
                                   std::optional<double> noise_bound) {
  check_ar_norm(a_norm);
  DependenceConstants out;
  out.sigma = 2.0 * a_norm * lipschitz * mean_noise_norm / ((1.0 - a_norm) * (1.0 - a_norm));
  if (noise_bound) {
    const double root = std::sqrt(a_norm);
    out.gamma = 2.0 * *noise_bound * std::sqrt(lipschitz * a_norm) / ((1.0 - a_norm) * (1.0 - root));
  }
  return out;
}

double binary_half_ar_rho_bound(double lipschitz, int t) { return lipschitz / std::pow(2.0, t); }

DependenceConstants binary_half_ar_constants(double lipschitz) {
  return {2.0 * lipschitz, 2.0 * std::sqrt(lipschitz) / (std::sqrt(2.0) - 1.0)};
}

double markov_beta_bound(double c, int r, int t) {
  if (!(c > 0.0) || c > 1.0 || r < 1 || t < 1) throw std::invalid_argument("markov_beta_bound: need 0<c<=1, r,t>=1");
  if (c == 1.0) return 0.0;
  return 2.0 * std::pow(1.0 - c, static_cast<double>(t) / r - 1.0);
}

}  // namespace mmdest

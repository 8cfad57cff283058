#include "mmdest/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mmdest {

namespace {

constexpr double kLogSqrtTwoPi = 0.91893853320467274178;

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

void require_nonempty(const Sample& data) {
  if (data.rows() == 0 || data.cols() == 0) throw std::invalid_argument("empty data");
}

}  // namespace

VectorXd mean_estimator(const Sample& data) {
  require_nonempty(data);
  return data.colwise().mean().transpose();
}

VectorXd coordinatewise_median(const Sample& data) {
  require_nonempty(data);
  VectorXd out(data.cols());
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    out(c) = median_of(std::vector<double>(data.col(c).data(), data.col(c).data() + data.rows()));
  }
  return out;
}

double sum_of_distances(const Sample& data, const VectorXd& m) {
  return (data.rowwise() - m.transpose()).rowwise().norm().sum();
}

GeometricMedianResult geometric_median(const Sample& data, double tol, int max_iter) {
  require_nonempty(data);
  GeometricMedianResult result;
  VectorXd y = coordinatewise_median(data);
  const double coincide = 1e-12;
  for (int it = 1; it <= max_iter; ++it) {
    VectorXd weighted = VectorXd::Zero(y.size());
    VectorXd pull = VectorXd::Zero(y.size());
    double inv_sum = 0.0;
    int at_iterate = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const VectorXd diff = data.row(i).transpose() - y;
      const double dist = diff.norm();
      if (dist <= coincide) {
        ++at_iterate;
        continue;
      }
      weighted += data.row(i).transpose() / dist;
      pull += diff / dist;
      inv_sum += 1.0 / dist;
    }
    VectorXd next;
    if (inv_sum == 0.0) {
      next = y;  // every point coincides with the iterate
    } else {
      const VectorXd t = weighted / inv_sum;
      if (at_iterate == 0) {
        next = t;
      } else {
        const double r = pull.norm();
        const double ratio = r > 0.0 ? at_iterate / r : std::numeric_limits<double>::infinity();
        next = std::max(0.0, 1.0 - ratio) * t + std::min(1.0, ratio) * y;
      }
    }
    const double moved = (next - y).norm();
    y = next;
    result.iterations = it;
    if (moved < tol) {
      result.converged = true;
      break;
    }
  }
  result.point = y;
  return result;
}

VectorXd median_of_means(const Sample& data, int n_blocks, Rng& rng) {
  require_nonempty(data);
  const auto n = static_cast<int>(data.rows());
  if (n_blocks <= 0) n_blocks = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  if (n_blocks > n) throw std::invalid_argument("median_of_means: more blocks than points");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Sample block_means(n_blocks, data.cols());
  int start = 0;
  for (int b = 0; b < n_blocks; ++b) {
    const int size = n / n_blocks + (b < n % n_blocks ? 1 : 0);
    VectorXd acc = VectorXd::Zero(data.cols());
    for (int i = start; i < start + size; ++i) acc += data.row(order[i]).transpose();
    block_means.row(b) = (acc / size).transpose();
    start += size;
  }
  return coordinatewise_median(block_means);
}

VectorXd MixtureFit::density(const Sample& z) const {
  VectorXd out = VectorXd::Zero(z.rows());
  const double sd = std::sqrt(variance);
  for (Eigen::Index k = 0; k < means.size(); ++k) {
    const auto u = (z.col(0).array() - means(k)) / sd;
    out.array() += weights(k) * (-0.5 * u * u - kLogSqrtTwoPi).exp() / sd;
  }
  return out;
}

namespace {

// Log-likelihood and responsibilities (n x K) for unit-variance components.
double e_step(const VectorXd& x, const VectorXd& weights, const VectorXd& means, MatrixXd& resp) {
  const Eigen::Index n = x.size();
  const Eigen::Index k = means.size();
  resp.resize(n, k);
  double loglik = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < k; ++c) {
      const double u = x(i) - means(c);
      resp(i, c) = weights(c) > 0.0 ? std::log(weights(c)) - 0.5 * u * u - kLogSqrtTwoPi
                                    : -std::numeric_limits<double>::infinity();
      top = std::max(top, resp(i, c));
    }
    double acc = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      resp(i, c) = std::exp(resp(i, c) - top);
      acc += resp(i, c);
    }
    resp.row(i) /= acc;
    loglik += top + std::log(acc);
  }
  return loglik;
}

}  // namespace

MixtureFit em_mixture(const Sample& data, const EmOptions& options, Rng& rng) {
  require_nonempty(data);
  if (data.cols() != 1) throw std::invalid_argument("em_mixture: univariate data only");
  if (options.components < 1 || options.restarts < 1) throw std::invalid_argument("em_mixture: bad options");
  const VectorXd x = data.col(0);
  const auto n = static_cast<int>(x.size());
  const int k = options.components;
  std::uniform_int_distribution<int> pick(0, n - 1);

  MixtureFit best;
  best.loglik = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    VectorXd weights = VectorXd::Constant(k, 1.0 / k);
    VectorXd means(k);
    for (int c = 0; c < k; ++c) means(c) = x(pick(rng));

    MatrixXd resp;
    std::vector<double> trace;
    double loglik = e_step(x, weights, means, resp);
    trace.push_back(loglik);
    int it = 0;
    for (it = 1; it <= options.max_iter; ++it) {
      const VectorXd mass = resp.colwise().sum().transpose();
      for (int c = 0; c < k; ++c) {
        if (mass(c) < 1e-12) {
          // Empty component: restart it at a random observation.
          means(c) = x(pick(rng));
          weights(c) = 1.0 / n;
        } else {
          means(c) = resp.col(c).dot(x) / mass(c);
          weights(c) = mass(c) / n;
        }
      }
      weights /= weights.sum();
      const double next = e_step(x, weights, means, resp);
      trace.push_back(next);
      const double gain = next - loglik;
      loglik = next;
      if (std::abs(gain) < options.tol) break;
    }
    if (loglik > best.loglik) {
      best.weights = weights;
      best.means = means;
      best.loglik = loglik;
      best.iterations = std::min(it, options.max_iter);
      best.loglik_trace = std::move(trace);
    }
  }
  return best;
}

double mae_density(const DensityFn& p_true, const Sampler& truth_sampler, const DensityFn& p_hat, int draws,
                   Rng& rng) {
  if (draws < 1) throw std::invalid_argument("mae_density: draws must be >= 1");
  const Sample z = truth_sampler(draws, rng);
  return (p_true(z) - p_hat(z)).cwiseAbs().mean();
}

double sqrt_mse(const std::vector<VectorXd>& estimates, const VectorXd& truth) {
  if (estimates.empty()) throw std::invalid_argument("sqrt_mse: no estimates");
  double acc = 0.0;
  for (const auto& e : estimates) acc += (e - truth).squaredNorm();
  return std::sqrt(acc / static_cast<double>(estimates.size()));
}

double rmse_per_coordinate(const std::vector<VectorXd>& estimates, const VectorXd& truth) {
  return sqrt_mse(estimates, truth) / std::sqrt(static_cast<double>(truth.size()));
}

}  // namespace mmdest

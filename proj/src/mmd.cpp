#include "mmdest/mmd.hpp"

#include <vector>

namespace mmdest {

namespace {
MonteCarloMean summarize(const std::vector<double>& values) {
  MonteCarloMean out;
  out.replications = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std_error = std::sqrt(ss / (values.size() - 1) / values.size());
  }
  return out;
}
}  // namespace

MonteCarloMean empirical_mmd_to_truth(const Kernel<double>& k, const Sampler& truth, int n, int reps, Rng& rng,
                                      int proxy_factor) {
  return empirical_mmd_to_truth(k, truth, truth, n, reps, rng, proxy_factor);
}

MonteCarloMean empirical_mmd_to_truth(const Kernel<double>& k, const Sampler& trajectory, const Sampler& truth,
                                      int n, int reps, Rng& rng, int proxy_factor) {
  if (n < 1 || reps < 1 || proxy_factor < 1) throw std::invalid_argument("empirical_mmd_to_truth: bad sizes");
  std::vector<double> values;
  values.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    const Sample x = trajectory(n, rng);
    const Sample proxy = truth(proxy_factor * n, rng);
    values.push_back(mmd2_vstat(k, x, proxy).value);
  }
  return summarize(values);
}

}  // namespace mmdest

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "mmdest/bounds.hpp"
#include "mmdest/config.hpp"
#include "mmdest/csv.hpp"
#include "mmdest/dependence.hpp"
#include "mmdest/estimator.hpp"
#include "mmdest/experiments.hpp"

using namespace mmdest;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << text;
}

std::string vector_line(const VectorXd& v) {
  std::vector<std::string> fields;
  for (Eigen::Index i = 0; i < v.size(); ++i) fields.push_back(format_number(v(i)));
  return csv_line(fields) + "\n";
}

std::string theta_header(Eigen::Index p) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < p; ++i) names.push_back("theta" + std::to_string(i));
  return csv_line(names) + "\n";
}

struct EstimateArgs {
  std::string data;
  std::string model = "gaussian";
  double sigma = 1.0;
  double dict_lo = -5.0, dict_hi = 5.0, dict_step = 0.02;
  std::string kernel = "gaussian";
  std::optional<double> gamma;
  int batch = 0;
  int steps = 2000;
  std::string schedule = "inverse_sqrt";
  double step_scale = 1.0;
  bool averaging = false;
  double average_tail = 1.0;
  bool trajectory = false;
};

int run_estimate(const EstimateArgs& a, std::uint64_t seed, const std::string& out) {
  const Sample data = read_csv_sample(a.data);
  const int n = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  std::optional<Model> model;
  if (a.model == "gaussian") model = Model::gaussian_location(a.sigma, d);
  else if (a.model == "cauchy") model = Model::cauchy_location();
  else if (a.model == "uniform") model = Model::uniform_translation();
  else if (a.model == "dictionary") model = Model::dictionary_mixture(gaussian_dictionary(a.dict_lo, a.dict_hi, a.dict_step, a.sigma * a.sigma));
  else throw std::invalid_argument("unknown model '" + a.model + "'");
  if (model->data_dim() != d)
    throw std::invalid_argument("data has " + std::to_string(d) + " columns, model expects " +
                                std::to_string(model->data_dim()));
  const Kernel<double> k(kernel_family_from_string(a.kernel), a.gamma ? *a.gamma : std::sqrt(static_cast<double>(d)));

  PsgaSettings p;
  p.batch_size = a.batch;
  p.steps = a.steps;
  if (a.schedule == "inverse_sqrt") p.schedule = StepSchedule::inverse_sqrt(a.step_scale);
  else if (a.schedule == "constant") p.schedule = StepSchedule::constant(a.step_scale);
  else throw std::invalid_argument("schedule must be inverse_sqrt or constant");
  p.averaging = a.averaging;
  p.average_tail = a.average_tail;
  EstimatorConfig cfg = p.config(n, k, seed);
  cfg.keep_trajectory = a.trajectory;

  const EstimateResult res = model->has_score() ? psga(k, *model, data, cfg) : exact_gradient_descent_uniform(k, data, cfg);
  std::cout << theta_header(res.theta_hat.size()) << vector_line(res.theta_hat);
  if (!out.empty()) {
    write_file(fs::path(out) / "estimate.csv", theta_header(res.theta_hat.size()) + vector_line(res.theta_hat));
    if (a.trajectory) {
      std::string text = "step," + theta_header(res.theta_hat.size());
      for (std::size_t t = 0; t < res.trajectory.size(); ++t)
        text += std::to_string(t + 1) + "," + vector_line(res.trajectory[t]);
      write_file(fs::path(out) / "trajectory.csv", text);
    }
  }
  std::cerr << "n=" << n << " d=" << d << " model=" << model->name() << " steps=" << res.steps
            << " crit=" << format_number(res.final_crit) << "\n";
  return 0;
}

int run_experiment_cmd(const std::string& config, const std::string& kind, std::optional<std::uint64_t> seed,
                       std::optional<int> reps, const std::string& out, int jobs) {
  ExperimentSpec spec = !config.empty() ? load_experiment_spec(config)
                                        : ExperimentSpec::defaults(experiment_kind_from_string(kind));
  if (seed) spec.base_seed = *seed;
  if (reps) spec.repetitions = *reps;
  const ExperimentOutput result = run_experiment(spec, jobs);
  if (out.empty()) {
    std::cout << results_csv(result);
    return 0;
  }
  write_outputs(result, out);
  write_file(fs::path(out) / "config.json", experiment_spec_to_json(spec));
  std::cout << results_csv(result);
  std::cerr << "wrote " << out << "\n";
  return 0;
}

struct RhoArgs {
  std::string process = "ar";
  double ar_coefficient = 0.5;
  int max_lag = 8;
  int replications = 200;
  int length = 400;
  double gamma = 1.0;
};

int run_rho(const RhoArgs& a, std::uint64_t seed, const std::string& out) {
  const Kernel<double> k = Kernel<double>::gaussian(a.gamma);
  const double lip = k.lipschitz();
  const Sampler standard = [](int count, Rng& rng) { return standard_normal(count, 1, rng); };
  std::optional<DataProcess> process;
  std::function<double(int)> bound;
  if (a.process == "iid") {
    process = DataProcess::iid(standard, 1);
    bound = [](int) { return 0.0; };
  } else if (a.process == "ar") {
    process = DataProcess::gaussian_ar1(a.ar_coefficient);
    bound = [&](int t) { return ar_rho_bound(std::abs(a.ar_coefficient), lip, std::sqrt(2.0 / std::numbers::pi), t); };
  } else if (a.process == "binary_half_ar") {
    process = DataProcess::binary_half_ar();
    bound = [&](int t) { return binary_half_ar_rho_bound(lip, t); };
  } else {
    throw std::invalid_argument("process must be iid, ar or binary_half_ar");
  }
  std::string text = csv_line({"t", "rho_hat", "stderr", "analytic_bound"}) + "\n";
  for (int t = 1; t <= a.max_lag; ++t) {
    const RhoEstimate r = rho_hat(*process, k, t, a.replications, a.length, sweep_seed(seed, 0, t));
    text += csv_line({std::to_string(t), format_number(r.value), format_number(r.std_error), format_number(bound(t))}) + "\n";
  }
  std::cout << text;
  if (!out.empty()) write_file(fs::path(out) / "rho.csv", text);
  return 0;
}

struct BoundArgs {
  double n = 500;
  double sigma_dep = 0.0;  // Sigma
  double gamma_dep = 0.0;  // Gamma
  double eps = 0.0;
  double delta = 0.05;
  int d = 1;
  double sd = 1.0;
  std::optional<double> kernel_gamma;
  double c = 1.0;
  int r = 1;
  std::optional<double> lambda_min;
  int components = 501;
  double steps = 2000;
  double diameter = 1.0;
  double grad_bound = 1.0;
  bool cauchy_k128 = false;
};

int run_bounds(const BoundArgs& a, const std::string& out) {
  const double kg = a.kernel_gamma ? *a.kernel_gamma : a.sd * std::sqrt(2.0 * a.d);
  std::vector<BoundReport> reports{
      bound_expectation(a.n, a.sigma_dep),
      bound_highprob(a.n, a.sigma_dep, a.gamma_dep, a.delta),
      bound_huber(a.n, a.sigma_dep, a.eps),
      bound_huber_hp(a.n, a.sigma_dep, a.gamma_dep, a.eps, a.delta),
      bound_adversarial(a.n, a.sigma_dep, a.eps),
      bound_gauss_param(a.sd, a.d, kg, a.eps, a.n, a.delta),
      bound_cauchy_param(a.eps, a.n, a.delta, a.cauchy_k128 ? CauchyConstant::K128 : CauchyConstant::K96),
      bound_hmm(a.n, a.c, a.r),
      bound_hmm_adversarial(a.n, a.c, a.r, a.eps),
      bound_sgd(a.diameter, a.grad_bound, a.steps),
      bound_sgd_full(a.diameter, a.grad_bound, a.steps, a.n, a.sigma_dep),
      bound_sgd_dictionary(a.components, a.steps),
  };
  if (a.lambda_min) reports.push_back(bound_dictionary_param(a.n, a.delta, *a.lambda_min));
  std::string text = csv_line({"bound", "value", "vacuous", "uninformative", "inputs", "note"}) + "\n";
  for (const auto& b : reports) {
    std::string inputs;
    for (const auto& [name, value] : b.inputs) inputs += (inputs.empty() ? "" : " ") + name + "=" + format_number(value);
    text += csv_line({to_string(b.id), format_number(b.value), b.vacuous ? "1" : "0", b.uninformative ? "1" : "0",
                      inputs, b.note}) +
            "\n";
  }
  std::cout << text;
  if (!out.empty()) write_file(fs::path(out) / "bounds.csv", text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // The gradient loop allocates megabyte-sized temporaries every step; keep them on the heap
  // instead of mapping and faulting fresh pages each time.
  mallopt(M_MMAP_THRESHOLD, 32 * 1024 * 1024);
  mallopt(M_TRIM_THRESHOLD, 512 * 1024 * 1024);
#endif
  CLI::App app{"Minimum-MMD parametric estimation: estimator, experiments, dependence and bound tools"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  std::string out;
  int jobs = 1;

  auto* est = app.add_subcommand("estimate", "Fit a model to a CSV sample by projected stochastic gradient");
  EstimateArgs ea;
  est->add_option("--data", ea.data, "CSV sample, one observation per row")->required()->check(CLI::ExistingFile);
  est->add_option("--model", ea.model, "gaussian | cauchy | uniform | dictionary")->capture_default_str();
  est->add_option("--sigma", ea.sigma, "Gaussian scale (also the dictionary component sd)")->capture_default_str();
  est->add_option("--dict-lo", ea.dict_lo, "Smallest dictionary mean")->capture_default_str();
  est->add_option("--dict-hi", ea.dict_hi, "Largest dictionary mean")->capture_default_str();
  est->add_option("--dict-step", ea.dict_step, "Spacing of dictionary means")->capture_default_str();
  est->add_option("--kernel", ea.kernel, "gaussian | laplace")->capture_default_str();
  est->add_option("--gamma", ea.gamma, "Kernel bandwidth (default sqrt(d))");
  est->add_option("--batch", ea.batch, "Model draws per step M (0: M = n)")->capture_default_str();
  est->add_option("--steps", ea.steps, "Number of steps T")->capture_default_str();
  est->add_option("--schedule", ea.schedule, "inverse_sqrt | constant")->capture_default_str();
  est->add_option("--step-scale", ea.step_scale, "c in c/sqrt(t), or the constant step")->capture_default_str();
  est->add_flag("--averaging", ea.averaging, "Return the averaged iterate");
  est->add_option("--average-tail", ea.average_tail, "Fraction of final iterates averaged")->capture_default_str();
  est->add_flag("--trajectory", ea.trajectory, "Write trajectory.csv to --out");

  auto* exp = app.add_subcommand("experiment", "Run a simulation study");
  std::string config, kind = "table1";
  std::optional<int> reps;
  std::optional<std::uint64_t> exp_seed;
  exp->add_option("--config", config, "JSON experiment file")->check(CLI::ExistingFile);
  exp->add_option("--kind", kind, "Study with default settings: table1 | eps_sweep | dim_sweep | mixture | dependence");
  exp->add_option("--repetitions", reps, "Override the number of repetitions");
  exp->add_option("--seed", exp_seed, "Override the base seed");

  auto* rho = app.add_subcommand("rho", "Estimate dependence coefficients rho_t of a process");
  RhoArgs ra;
  rho->add_option("--process", ra.process, "iid | ar | binary_half_ar")->capture_default_str();
  rho->add_option("--ar-coefficient", ra.ar_coefficient, "AR(1) coefficient")->capture_default_str();
  rho->add_option("--max-lag", ra.max_lag, "Largest lag")->capture_default_str()->check(CLI::PositiveNumber);
  rho->add_option("--replications", ra.replications, "Independent trajectory pairs")->capture_default_str();
  rho->add_option("--length", ra.length, "Trajectory length")->capture_default_str();
  rho->add_option("--gamma", ra.gamma, "Gaussian kernel bandwidth")->capture_default_str();

  auto* bnd = app.add_subcommand("bounds", "Evaluate the error bounds at given inputs");
  BoundArgs ba;
  bnd->add_option("--n", ba.n, "Sample size (inf allowed)")->capture_default_str();
  bnd->add_option("--sigma-dep", ba.sigma_dep, "Dependence constant Sigma")->capture_default_str();
  bnd->add_option("--gamma-dep", ba.gamma_dep, "Dependence constant Gamma")->capture_default_str();
  bnd->add_option("--eps", ba.eps, "Contamination rate")->capture_default_str();
  bnd->add_option("--delta", ba.delta, "Confidence level")->capture_default_str();
  bnd->add_option("--d", ba.d, "Dimension (Gaussian mean bound)")->capture_default_str();
  bnd->add_option("--sd", ba.sd, "Gaussian model sd")->capture_default_str();
  bnd->add_option("--kernel-gamma", ba.kernel_gamma, "Kernel bandwidth (default sd * sqrt(2d))");
  bnd->add_option("--c", ba.c, "Minorization constant of the hidden chain")->capture_default_str();
  bnd->add_option("--r", ba.r, "Minorization power")->capture_default_str();
  bnd->add_option("--lambda-min", ba.lambda_min, "Smallest eigenvalue of the dictionary Gram matrix");
  bnd->add_option("--components", ba.components, "Dictionary size D")->capture_default_str();
  bnd->add_option("--steps", ba.steps, "SGD steps T")->capture_default_str();
  bnd->add_option("--diameter", ba.diameter, "Diameter of the parameter set")->capture_default_str();
  bnd->add_option("--grad-bound", ba.grad_bound, "Bound on the gradient norm")->capture_default_str();
  bnd->add_flag("--cauchy-k128", ba.cauchy_k128, "Use K = 128 in the Cauchy bound");

  for (auto* sub : {est, exp, rho, bnd}) {
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  }
  for (auto* sub : {est, rho}) sub->add_option("--seed", seed, "Random seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*est) return run_estimate(ea, seed, out);
    if (*exp) return run_experiment_cmd(config, kind, exp_seed, reps, out, jobs);
    if (*rho) return run_rho(ra, seed, out);
    if (*bnd) return run_bounds(ba, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

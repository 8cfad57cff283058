#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmdest/baselines.hpp"
#include "mmdest/estimator.hpp"
#include "mmdest/kernels.hpp"
#include "mmdest/svg.hpp"

namespace mmdest {

enum class ExperimentKind { Table1, EpsSweep, DimSweep, Mixture, Dependence };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Kernel choice: the default Gaussian with gamma^2 = d, or an explicit family and bandwidth.
struct KernelSpec {
  bool dimension_default = true;
  KernelFamily family = KernelFamily::Gaussian;
  double gamma = 1.0;

  Kernel<double> make(int d) const;
};

/// Stochastic gradient settings shared by the simulation runners.
struct PsgaSettings {
  int batch_size = 0;  // M; 0 means M = n
  int steps = 2000;    // T
  StepSchedule schedule = StepSchedule::inverse_sqrt(1.0);
  bool scale_by_bandwidth = false;  // multiply the step scale by gamma^2
  bool averaging = false;
  double average_tail = 1.0;  // fraction of the last iterates averaged when averaging

  EstimatorConfig config(int n, const Kernel<double>& k, std::uint64_t seed) const;
};

struct ExperimentSpec {
  std::string name;
  ExperimentKind kind = ExperimentKind::Table1;
  int n = 500;
  int d = 10;
  double epsilon = 0.2;
  int repetitions = 50;
  std::uint64_t base_seed = 1;
  KernelSpec kernel;
  PsgaSettings psga;
  std::vector<std::string> contaminations;  // table1 columns, or the attacks of a sweep
  std::vector<std::string> methods;         // subset of mean, median, geometric_median, median_of_means, mmd
  std::vector<double> sweep;                // epsilon grid or dimension grid
  bool common_random_numbers = true;        // sweeps: reuse repetition seeds along the axis

  // Mixture study.
  std::vector<double> mixture_weights{0.3, 0.3, 0.4};
  std::vector<double> mixture_means{-3.72, 0.11, 4.54};
  double dictionary_lo = -5.0;
  double dictionary_hi = 5.0;
  double dictionary_step = 0.02;
  double outlier = 100.0;
  int mae_draws = 10000;
  EmOptions em;

  // Dependence study.
  std::vector<int> lags{1, 2, 3, 4, 5, 6, 7, 8};
  int rho_replications = 200;
  int rho_length = 400;
  double ar_coefficient = 0.5;
  MatrixXd hmm_transition;
  std::vector<double> hmm_means{-3.0, 0.0, 3.0};
  std::vector<int> hmm_sizes{500, 1000, 2000, 5000};

  /// Defaults of each study (sample sizes, grids, repetitions, estimator settings).
  static ExperimentSpec defaults(ExperimentKind kind);
};

/// One aggregated result. `reference_value` carries a published figure for side-by-side
/// display and always comes with `reference_id`.
struct ResultRow {
  std::string experiment;
  std::string method;
  std::string setting;
  double sweep = 0.0;
  std::string metric;
  double value = 0.0;
  double stdev = 0.0;
  int repetitions = 0;
  std::uint64_t seed = 0;
  std::optional<double> reference_value;
  std::optional<double> reference_stdev;
  std::string reference_id;
};

/// One repetition's raw error (squared parameter error, MAE, ...).
struct RepetitionRow {
  std::string experiment;
  std::string method;
  std::string setting;
  double sweep = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
};

struct NamedChart {
  std::string file;  // e.g. "eps_sweep.svg"
  LineChart chart;
};

struct ExperimentOutput {
  std::vector<ResultRow> rows;
  std::vector<RepetitionRow> repetitions;
  std::vector<NamedChart> charts;
  std::vector<std::string> notes;

  /// First row matching the keys; throws if none.
  const ResultRow& find(const std::string& method, const std::string& setting, const std::string& metric,
                        std::optional<double> sweep = std::nullopt) const;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = a x + b with the coefficient of determination.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Runs fn(0..count-1) on up to `jobs` threads. Results must be written to per-index slots.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

/// base_seed * 10^6 + axis * 1000 + rep.
std::uint64_t sweep_seed(std::uint64_t base_seed, int axis_index, int rep);

ExperimentOutput run_table1(const ExperimentSpec& spec, int jobs = 1);
ExperimentOutput run_eps_sweep(const ExperimentSpec& spec, int jobs = 1);
ExperimentOutput run_dim_sweep(const ExperimentSpec& spec, int jobs = 1);
ExperimentOutput run_mixture(const ExperimentSpec& spec, int jobs = 1);
ExperimentOutput run_dependence_demo(const ExperimentSpec& spec, int jobs = 1);
ExperimentOutput run_experiment(const ExperimentSpec& spec, int jobs = 1);

/// Column order of results.csv and repetitions.csv.
const std::vector<std::string>& result_columns();
const std::vector<std::string>& repetition_columns();

/// CSV text with rows sorted by (method, setting, sweep, metric) and (method, setting, sweep, rep).
std::string results_csv(const ExperimentOutput& out);
std::string repetitions_csv(const ExperimentOutput& out);

/// Writes results.csv, repetitions.csv, one SVG per chart and notes.txt into `dir`.
void write_outputs(const ExperimentOutput& out, const std::string& dir);

}  // namespace mmdest

#include "mmdest/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

#include "mmdest/bounds.hpp"
#include "mmdest/contamination.hpp"
#include "mmdest/csv.hpp"
#include "mmdest/dependence.hpp"
#include "mmdest/errors.hpp"

namespace mmdest {

namespace {

constexpr const char* kGaussianMeanTable = "gaussian_mean_table";
constexpr const char* kMixtureTable = "mixture_mae_table";

struct Reference {
  double value;
  double stdev;
};

using ReferenceTable = std::map<std::string, std::map<std::string, Reference>>;

// Published root-MSE values (per coordinate) of the Gaussian-mean study, d = 10, n = 500, eps = 0.2.
const ReferenceTable& gaussian_mean_reference() {
  static const ReferenceTable table = [] {
    const std::vector<std::string> cols{"N(0.2)", "N(0.5)", "N(1)", "N(5)", "N(10)", "C(0.5)", "delta(1)", "delta(10)"};
    const std::map<std::string, std::vector<Reference>> rows{
        {"mean",
         {{0.0379, 0.0046}, {0.0954, 0.0039}, {0.2033, 0.0115}, {1.0166, 0.0145},
          {1.9915, 0.0153}, {0.3577, 0.6451}, {0.2057, 0.0115}, {2.0048, 0.0156}}},
        {"median",
         {{0.0387, 0.0158}, {0.0893, 0.0098}, {0.1756, 0.0058}, {0.3106, 0.0109},
          {0.3345, 0.0164}, {0.0769, 0.0232}, {0.3194, 0.0215}, {0.3258, 0.0098}}},
        {"js_gan_reported",
         {{0.1848, 0.0443}, {0.2036, 0.0346}, {0.2172, 0.0241}, {0.1879, 0.0287},
          {0.2204, 0.0423}, {0.2276, 0.0376}, {0.1969, 0.0342}, {0.1877, 0.0324}}},
        {"mmd",
         {{0.0654, 0.0132}, {0.1172, 0.0199}, {0.1730, 0.0077}, {0.0634, 0.0081},
          {0.0681, 0.0157}, {0.0882, 0.0140}, {0.3622, 0.0212}, {0.0601, 0.0157}}},
    };
    ReferenceTable out;
    for (const auto& [method, refs] : rows)
      for (std::size_t c = 0; c < cols.size(); ++c) out[method][cols[c]] = refs[c];
    return out;
  }();
  return table;
}

// Published density MAE of the mixture study.
const ReferenceTable& mixture_reference() {
  static const ReferenceTable table{
      {"mmd", {{"clean", {0.0170, 0.0052}}, {"outlier", {0.0173, 0.0045}}}},
      {"em", {{"clean", {0.0186, 0.0147}}, {"outlier", {0.0738, 0.0186}}}},
      {"cavi_reported", {{"clean", {0.0218, 0.0172}}, {"outlier", {0.0976, 0.0002}}}},
  };
  return table;
}

std::optional<Reference> lookup(const ReferenceTable& table, const std::string& method, const std::string& setting) {
  const auto m = table.find(method);
  if (m == table.end()) return std::nullopt;
  const auto s = m->second.find(setting);
  if (s == m->second.end()) return std::nullopt;
  return s->second;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return seed * 4 + stream; }

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stdev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

const std::vector<std::string>& location_methods() {
  static const std::vector<std::string> names{"mean", "median", "geometric_median", "median_of_means", "mmd"};
  return names;
}

void check_methods(const std::vector<std::string>& methods, const std::vector<std::string>& allowed) {
  if (methods.empty()) throw ConfigError("experiment needs at least one method");
  for (const auto& m : methods)
    if (std::find(allowed.begin(), allowed.end(), m) == allowed.end())
      throw ConfigError("unknown method '" + m + "'");
}

void check_common(const ExperimentSpec& spec) {
  if (spec.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (spec.n < 2) throw ConfigError("n must be >= 2");
  if (spec.d < 1) throw ConfigError("d must be >= 1");
}

// One location estimate of the Gaussian-mean study.
VectorXd estimate_location(const std::string& method, const ExperimentSpec& spec, const Kernel<double>& k,
                           const Sample& data, std::uint64_t seed) {
  if (method == "mean") return mean_estimator(data);
  if (method == "median") return coordinatewise_median(data);
  if (method == "geometric_median") return geometric_median(data).point;
  if (method == "median_of_means") {
    Rng rng(stream_seed(seed, 2));
    return median_of_means(data, 0, rng);
  }
  const Model model = Model::gaussian_location(1.0, static_cast<int>(data.cols()));
  return psga(k, model, data, spec.psga.config(static_cast<int>(data.rows()), k, stream_seed(seed, 1))).theta_hat;
}

// Clean N(0, I_d) sample of size n, adversarially contaminated by `attack` at rate eps.
Sample contaminated_gaussian_sample(int n, int d, double eps, const std::string& attack, std::uint64_t seed) {
  Rng rng(stream_seed(seed, 0));
  const Sample clean = standard_normal(n, d, rng);
  if (eps == 0.0) return clean;
  return contaminate(clean, ContaminationSpec::adversarial_sampler(eps, table1_contamination(attack, d)), rng).data;
}

struct LocationCell {
  std::vector<double> sq_errors;  // ||theta_hat - theta_0||^2 per repetition
  std::vector<std::uint64_t> seeds;
};

// Runs every (axis point, attack, repetition) triple of a Gaussian-mean study.
// cells[axis][attack][method].
using CellGrid = std::vector<std::vector<std::map<std::string, LocationCell>>>;

CellGrid run_location_grid(const ExperimentSpec& spec, const std::vector<int>& dims, const std::vector<double>& eps,
                           int jobs) {
  const int axes = static_cast<int>(dims.size());
  const int attacks = static_cast<int>(spec.contaminations.size());
  const int reps = spec.repetitions;
  CellGrid cells(axes, std::vector<std::map<std::string, LocationCell>>(attacks));
  for (auto& row : cells)
    for (auto& cell : row)
      for (const auto& m : spec.methods) cell[m] = {std::vector<double>(reps), std::vector<std::uint64_t>(reps)};
  const int tasks = axes * attacks * reps;
  parallel_for(tasks, jobs, [&](int task) {
    const int rep = task % reps;
    const int attack = (task / reps) % attacks;
    const int axis = task / (reps * attacks);
    // With common random numbers the clean sample and outlier positions are shared along the axis.
    const std::uint64_t seed = sweep_seed(spec.base_seed, spec.common_random_numbers ? 0 : axis, rep);
    const int d = dims[axis];
    const Sample data = contaminated_gaussian_sample(spec.n, d, eps[axis], spec.contaminations[attack], seed);
    const Kernel<double> k = spec.kernel.make(d);
    for (const auto& m : spec.methods) {
      const VectorXd est = estimate_location(m, spec, k, data, seed);
      auto& cell = cells[axis][attack].at(m);
      cell.sq_errors[rep] = est.squaredNorm();
      cell.seeds[rep] = seed;
    }
  });
  return cells;
}

void add_repetitions(ExperimentOutput& out, const std::string& experiment, const std::string& method,
                     const std::string& setting, double sweep, const LocationCell& cell) {
  for (std::size_t r = 0; r < cell.sq_errors.size(); ++r)
    out.repetitions.push_back({experiment, method, setting, sweep, static_cast<int>(r), cell.seeds[r], "sq_error",
                               cell.sq_errors[r]});
}

ResultRow make_row(const ExperimentSpec& spec, const std::string& method, const std::string& setting, double sweep,
                   const std::string& metric, double value, double stdev, int reps) {
  ResultRow row;
  row.experiment = spec.name;
  row.method = method;
  row.setting = setting;
  row.sweep = sweep;
  row.metric = metric;
  row.value = value;
  row.stdev = stdev;
  row.repetitions = reps;
  row.seed = spec.base_seed;
  return row;
}

void add_fit_rows(ExperimentOutput& out, const ExperimentSpec& spec, const std::string& method,
                  const std::string& setting, const LinearFit& fit, int points) {
  out.rows.push_back(make_row(spec, method, setting, 0.0, "fit_slope", fit.slope, 0.0, points));
  out.rows.push_back(make_row(spec, method, setting, 0.0, "fit_intercept", fit.intercept, 0.0, points));
  out.rows.push_back(make_row(spec, method, setting, 0.0, "fit_r2", fit.r2, 0.0, points));
}

std::string describe_psga(const PsgaSettings& p, int n) {
  std::ostringstream s;
  s << "psga: M=" << (p.batch_size > 0 ? p.batch_size : n) << ", T=" << p.steps << ", step "
    << (p.schedule.kind == StepKind::InverseSqrt ? "c/sqrt(t)" : "constant c") << " with c=" << p.schedule.scale
    << (p.scale_by_bandwidth ? " * gamma^2" : "");
  if (p.averaging) s << ", averaging the last " << p.average_tail * 100.0 << "% of iterates";
  else s << ", last iterate";
  return s.str();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Table1: return "table1";
    case ExperimentKind::EpsSweep: return "eps_sweep";
    case ExperimentKind::DimSweep: return "dim_sweep";
    case ExperimentKind::Mixture: return "mixture";
    case ExperimentKind::Dependence: return "dependence";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto kind : {ExperimentKind::Table1, ExperimentKind::EpsSweep, ExperimentKind::DimSweep,
                    ExperimentKind::Mixture, ExperimentKind::Dependence})
    if (to_string(kind) == name) return kind;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

Kernel<double> KernelSpec::make(int d) const {
  if (dimension_default) return default_experiment_kernel(d);
  return Kernel<double>(family, gamma);
}

EstimatorConfig PsgaSettings::config(int n, const Kernel<double>& k, std::uint64_t seed) const {
  EstimatorConfig cfg;
  cfg.batch_size = batch_size > 0 ? batch_size : n;
  cfg.steps = steps;
  cfg.schedule = schedule;
  if (scale_by_bandwidth) cfg.schedule.scale *= k.bandwidth() * k.bandwidth();
  cfg.averaging = averaging;
  if (averaging) {
    if (!(average_tail > 0.0) || average_tail > 1.0) throw ConfigError("average_tail must lie in (0, 1]");
    const int tail = std::max(1, static_cast<int>(std::ceil(average_tail * steps)));
    cfg.average_from = steps - tail + 1;
  }
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

ExperimentSpec ExperimentSpec::defaults(ExperimentKind kind) {
  ExperimentSpec s;
  s.kind = kind;
  s.name = to_string(kind);
  PsgaSettings sweep_psga;
  sweep_psga.batch_size = 500;
  sweep_psga.steps = 800;
  sweep_psga.schedule = StepSchedule::inverse_sqrt(0.25);
  sweep_psga.scale_by_bandwidth = true;
  sweep_psga.averaging = true;
  sweep_psga.average_tail = 0.5;
  switch (kind) {
    case ExperimentKind::Table1:
      s.n = 500;
      s.d = 10;
      s.epsilon = 0.2;
      s.repetitions = 50;
      s.contaminations = table1_contaminations();
      s.methods = {"mean", "median", "mmd"};
      break;
    case ExperimentKind::EpsSweep:
      s.n = 5000;
      s.d = 10;
      s.repetitions = 10;
      s.contaminations = {"N(5)"};
      s.methods = {"mmd"};
      s.sweep = {0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16, 0.18, 0.2};
      s.psga = sweep_psga;
      break;
    case ExperimentKind::DimSweep:
      s.n = 5000;
      s.epsilon = 0.1;
      s.repetitions = 10;
      s.contaminations = {"N(5)", "delta(1)"};
      s.methods = {"mmd"};
      s.sweep = {4, 9, 16, 25, 36, 49, 64};
      s.psga = sweep_psga;
      break;
    case ExperimentKind::Mixture:
      s.n = 500;
      s.d = 1;
      s.repetitions = 50;
      s.methods = {"mmd", "em"};
      // The dictionary criterion is convex: return the averaged iterate.
      s.psga.averaging = true;
      break;
    case ExperimentKind::Dependence:
      s.d = 1;
      s.repetitions = 10;
      s.methods = {"mmd"};
      s.hmm_transition = MatrixXd::Constant(3, 3, 0.3) + 0.1 * MatrixXd::Identity(3, 3);
      s.psga.batch_size = 200;
      s.psga.steps = 1000;
      s.psga.averaging = true;
      s.psga.average_tail = 0.5;
      break;
  }
  return s;
}

const ResultRow& ExperimentOutput::find(const std::string& method, const std::string& setting,
                                        const std::string& metric, std::optional<double> sweep) const {
  for (const auto& row : rows)
    if (row.method == method && row.setting == setting && row.metric == metric && (!sweep || row.sweep == *sweep))
      return row;
  throw std::out_of_range("no result row for " + method + "/" + setting + "/" + metric);
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need two or more paired points");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::max(1, std::min(jobs, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t sweep_seed(std::uint64_t base_seed, int axis_index, int rep) {
  return repetition_seed(base_seed, static_cast<std::uint64_t>(axis_index) * 1000ULL + static_cast<std::uint64_t>(rep));
}

ExperimentOutput run_table1(const ExperimentSpec& spec, int jobs) {
  check_common(spec);
  check_methods(spec.methods, location_methods());
  if (spec.contaminations.empty()) throw ConfigError("table1 needs at least one contamination");
  const CellGrid cells = run_location_grid(spec, {spec.d}, {spec.epsilon}, jobs);
  ExperimentOutput out;
  const auto& refs = gaussian_mean_reference();
  for (std::size_t a = 0; a < spec.contaminations.size(); ++a) {
    const std::string& q = spec.contaminations[a];
    for (const auto& m : spec.methods) {
      const LocationCell& cell = cells[0][a].at(m);
      add_repetitions(out, spec.name, m, q, spec.epsilon, cell);
      std::vector<double> per_coord(cell.sq_errors.size());
      for (std::size_t r = 0; r < per_coord.size(); ++r) per_coord[r] = std::sqrt(cell.sq_errors[r] / spec.d);
      const double mse = mean_of(cell.sq_errors);
      ResultRow rmse = make_row(spec, m, q, spec.epsilon, "rmse", std::sqrt(mse / spec.d), stdev_of(per_coord),
                                spec.repetitions);
      if (spec.d == 10 && spec.n == 500 && spec.epsilon == 0.2) {
        if (auto ref = lookup(refs, m, q)) {
          rmse.reference_value = ref->value;
          rmse.reference_stdev = ref->stdev;
          rmse.reference_id = kGaussianMeanTable;
        }
      }
      out.rows.push_back(rmse);
      std::vector<double> norms(cell.sq_errors.size());
      for (std::size_t r = 0; r < norms.size(); ++r) norms[r] = std::sqrt(cell.sq_errors[r]);
      out.rows.push_back(make_row(spec, m, q, spec.epsilon, "sqrt_mse", std::sqrt(mse), stdev_of(norms),
                                  spec.repetitions));
    }
    if (spec.d == 10 && spec.n == 500 && spec.epsilon == 0.2) {
      if (auto ref = lookup(refs, "js_gan_reported", q)) {
        ResultRow row = make_row(spec, "js_gan_reported", q, spec.epsilon, "rmse", ref->value, ref->stdev, 0);
        row.reference_value = ref->value;
        row.reference_stdev = ref->stdev;
        row.reference_id = kGaussianMeanTable;
        out.rows.push_back(row);
      }
    }
  }
  out.notes.push_back("rmse = sqrt(mean_r ||theta_hat - theta_0||^2 / d), sqrt_mse = sqrt(mean_r ||theta_hat - theta_0||^2)");
  out.notes.push_back("adversarial contamination: floor(eps n) points replaced by draws from Q");
  out.notes.push_back(describe_psga(spec.psga, spec.n));
  out.notes.push_back("js_gan_reported rows are published values, not recomputed");
  return out;
}

ExperimentOutput run_eps_sweep(const ExperimentSpec& spec, int jobs) {
  check_common(spec);
  check_methods(spec.methods, location_methods());
  if (spec.sweep.empty()) throw ConfigError("eps_sweep needs a nonempty epsilon grid");
  if (spec.contaminations.empty()) throw ConfigError("eps_sweep needs a contamination");
  for (double e : spec.sweep)
    if (!(e >= 0.0 && e < 0.5)) throw ConfigError("epsilon grid values must lie in [0, 0.5)");
  const std::vector<int> dims(spec.sweep.size(), spec.d);
  const CellGrid cells = run_location_grid(spec, dims, spec.sweep, jobs);
  ExperimentOutput out;
  LineChart chart{"MSE against the outlier ratio (n=" + std::to_string(spec.n) + ", d=" + std::to_string(spec.d) + ")",
                  "epsilon", "MSE", {}};
  for (std::size_t a = 0; a < spec.contaminations.size(); ++a) {
    const std::string& q = spec.contaminations[a];
    for (const auto& m : spec.methods) {
      PlotSeries series{m + " " + q, {}, {}, {}};
      std::vector<double> fx, fy;
      for (std::size_t i = 0; i < spec.sweep.size(); ++i) {
        const LocationCell& cell = cells[i][a].at(m);
        add_repetitions(out, spec.name, m, q, spec.sweep[i], cell);
        const double mse = mean_of(cell.sq_errors);
        const double sd = stdev_of(cell.sq_errors);
        out.rows.push_back(make_row(spec, m, q, spec.sweep[i], "mse", mse, sd, spec.repetitions));
        series.x.push_back(spec.sweep[i]);
        series.y.push_back(mse);
        series.error.push_back(sd / std::sqrt(static_cast<double>(spec.repetitions)));
        if (spec.sweep[i] > 0.0) {
          fx.push_back(spec.sweep[i]);
          fy.push_back(mse);
        }
      }
      if (fx.size() >= 2) add_fit_rows(out, spec, m, q, fit_line(fx, fy), static_cast<int>(fx.size()));
      chart.series.push_back(std::move(series));
    }
  }
  out.charts.push_back({spec.name + ".svg", chart});
  out.notes.push_back("mse = mean_r ||theta_hat - theta_0||^2; fit over the positive epsilon values");
  out.notes.push_back(std::string("common random numbers along epsilon: ") +
                      (spec.common_random_numbers ? "yes (outlier sets are nested)" : "no"));
  out.notes.push_back(describe_psga(spec.psga, spec.n));
  return out;
}

ExperimentOutput run_dim_sweep(const ExperimentSpec& spec, int jobs) {
  check_common(spec);
  check_methods(spec.methods, location_methods());
  if (spec.sweep.empty()) throw ConfigError("dim_sweep needs a nonempty dimension grid");
  if (spec.contaminations.empty()) throw ConfigError("dim_sweep needs at least one contamination");
  std::vector<int> dims;
  for (double v : spec.sweep) {
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("dimension grid values must be positive integers");
    dims.push_back(static_cast<int>(v));
  }
  const CellGrid cells = run_location_grid(spec, dims, std::vector<double>(dims.size(), spec.epsilon), jobs);
  ExperimentOutput out;
  LineChart chart{"Root MSE against sqrt(d) (n=" + std::to_string(spec.n) + ", eps=" + format_number(spec.epsilon) + ")",
                  "sqrt(d)", "sqrt(MSE)", {}};
  for (std::size_t a = 0; a < spec.contaminations.size(); ++a) {
    const std::string& q = spec.contaminations[a];
    for (const auto& m : spec.methods) {
      PlotSeries series{m + " " + q, {}, {}, {}};
      std::vector<double> roots, values;
      for (std::size_t i = 0; i < dims.size(); ++i) {
        const LocationCell& cell = cells[i][a].at(m);
        add_repetitions(out, spec.name, m, q, dims[i], cell);
        const double mse = mean_of(cell.sq_errors);
        std::vector<double> norms(cell.sq_errors.size()), per_coord(cell.sq_errors.size());
        for (std::size_t r = 0; r < norms.size(); ++r) {
          norms[r] = std::sqrt(cell.sq_errors[r]);
          per_coord[r] = norms[r] / std::sqrt(static_cast<double>(dims[i]));
        }
        out.rows.push_back(make_row(spec, m, q, dims[i], "sqrt_mse", std::sqrt(mse), stdev_of(norms), spec.repetitions));
        out.rows.push_back(
            make_row(spec, m, q, dims[i], "rmse", std::sqrt(mse / dims[i]), stdev_of(per_coord), spec.repetitions));
        roots.push_back(std::sqrt(static_cast<double>(dims[i])));
        values.push_back(std::sqrt(mse));
        series.x.push_back(roots.back());
        series.y.push_back(values.back());
        series.error.push_back(stdev_of(norms) / std::sqrt(static_cast<double>(spec.repetitions)));
      }
      if (roots.size() >= 2) {
        add_fit_rows(out, spec, m, q, fit_line(roots, values), static_cast<int>(roots.size()));
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        out.rows.push_back(make_row(spec, m, q, 0.0, "max_min_ratio", *hi / *lo, 0.0, static_cast<int>(roots.size())));
      }
      chart.series.push_back(std::move(series));
    }
  }
  out.charts.push_back({spec.name + ".svg", chart});
  out.notes.push_back("sqrt_mse = sqrt(mean_r ||theta_hat - theta_0||^2), rmse = sqrt_mse / sqrt(d); fits use sqrt_mse");
  out.notes.push_back(describe_psga(spec.psga, spec.n));
  return out;
}

ExperimentOutput run_mixture(const ExperimentSpec& spec, int jobs) {
  check_common(spec);
  check_methods(spec.methods, {"mmd", "em"});
  if (spec.mixture_weights.size() != spec.mixture_means.size() || spec.mixture_weights.empty())
    throw ConfigError("mixture weights and means must have the same nonzero length");
  if (spec.mae_draws < 1) throw ConfigError("mae_draws must be >= 1");
  const Model truth_model = Model::dictionary_mixture(gaussian_dictionary(spec.mixture_means, 1.0));
  const VectorXd truth_weights =
      Eigen::Map<const VectorXd>(spec.mixture_weights.data(), static_cast<Eigen::Index>(spec.mixture_weights.size()));
  if (!truth_model.space().contains(truth_weights, 1e-9)) throw ConfigError("mixture weights must lie on the simplex");
  const Model dict_model =
      Model::dictionary_mixture(gaussian_dictionary(spec.dictionary_lo, spec.dictionary_hi, spec.dictionary_step, 1.0));
  const Kernel<double> k = spec.kernel.make(1);
  const DensityFn p_true = [&](const Sample& z) { return truth_model.density(truth_weights, z); };
  const Sampler truth_sampler = [&](int count, Rng& rng) { return truth_model.sample(truth_weights, count, rng); };

  const std::vector<std::string> settings{"clean", "outlier"};
  const int reps = spec.repetitions;
  // mae[method][setting][rep]
  std::map<std::string, std::vector<std::vector<double>>> mae;
  for (const auto& m : spec.methods) mae[m] = std::vector<std::vector<double>>(2, std::vector<double>(reps));
  parallel_for(2 * reps, jobs, [&](int task) {
    const int rep = task % reps;
    const int s = task / reps;
    // Both settings share the clean sample.
    const std::uint64_t seed = sweep_seed(spec.base_seed, 0, rep);
    Rng data_rng(stream_seed(seed, 0));
    Sample data = truth_model.sample(truth_weights, spec.n, data_rng);
    if (s == 1) data(0, 0) = spec.outlier;
    for (const auto& m : spec.methods) {
      DensityFn p_hat;
      if (m == "mmd") {
        const VectorXd w = psga(k, dict_model, data, spec.psga.config(spec.n, k, stream_seed(seed, 1))).theta_hat;
        p_hat = [&dict_model, w](const Sample& z) { return dict_model.density(w, z); };
      } else {
        Rng em_rng(stream_seed(seed, 2));
        const MixtureFit fit = em_mixture(data, spec.em, em_rng);
        p_hat = [fit](const Sample& z) { return fit.density(z); };
      }
      Rng eval_rng(stream_seed(seed, 3));
      mae[m][s][rep] = mae_density(p_true, truth_sampler, p_hat, spec.mae_draws, eval_rng);
    }
  });
  ExperimentOutput out;
  const auto& refs = mixture_reference();
  const bool reference_protocol = spec.n == 500 && spec.mixture_means == std::vector<double>{-3.72, 0.11, 4.54} &&
                                  spec.mixture_weights == std::vector<double>{0.3, 0.3, 0.4} && spec.outlier == 100.0;
  for (int s = 0; s < 2; ++s) {
    for (const auto& m : spec.methods) {
      const auto& v = mae.at(m)[s];
      for (int r = 0; r < reps; ++r)
        out.repetitions.push_back({spec.name, m, settings[s], 0.0, r, sweep_seed(spec.base_seed, 0, r), "mae", v[r]});
      ResultRow row = make_row(spec, m, settings[s], 0.0, "mae", mean_of(v), stdev_of(v), reps);
      if (reference_protocol) {
        if (auto ref = lookup(refs, m, settings[s])) {
          row.reference_value = ref->value;
          row.reference_stdev = ref->stdev;
          row.reference_id = kMixtureTable;
        }
      }
      out.rows.push_back(row);
    }
    if (reference_protocol) {
      const Reference ref = *lookup(refs, "cavi_reported", settings[s]);
      ResultRow row = make_row(spec, "cavi_reported", settings[s], 0.0, "mae", ref.value, ref.stdev, 0);
      row.reference_value = ref.value;
      row.reference_stdev = ref.stdev;
      row.reference_id = kMixtureTable;
      out.rows.push_back(row);
    }
  }
  out.notes.push_back("mae: mean |p_true(z) - p_hat(z)| over " + std::to_string(spec.mae_draws) +
                      " fresh draws z from the true mixture");
  out.notes.push_back("outlier setting: the first point of the clean sample replaced by " + format_number(spec.outlier));
  out.notes.push_back("mmd: dictionary of " + std::to_string(dict_model.param_dim()) + " unit-variance Gaussians, " +
                      describe_psga(spec.psga, spec.n));
  out.notes.push_back("em: " + std::to_string(spec.em.restarts) + " random restarts, unit component variances");
  out.notes.push_back("cavi_reported rows are published values, not recomputed");
  return out;
}

ExperimentOutput run_dependence_demo(const ExperimentSpec& spec, int jobs) {
  if (spec.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (spec.lags.empty()) throw ConfigError("dependence demo needs at least one lag");
  if (spec.rho_replications < 2 || spec.rho_length < 2) throw ConfigError("rho estimation needs replications and length >= 2");
  if (!(spec.ar_coefficient >= 0.0 && spec.ar_coefficient < 1.0)) throw ConfigError("ar_coefficient must lie in [0, 1)");
  const Kernel<double> k = spec.kernel.make(1);
  const double lip = k.lipschitz();
  const double mean_abs_noise = std::sqrt(2.0 / std::numbers::pi);

  struct ProcessCase {
    DataProcess process;
    std::function<double(int)> envelope;
  };
  const Sampler standard = [](int count, Rng& rng) { return standard_normal(count, 1, rng); };
  const std::vector<ProcessCase> cases{
      {DataProcess::iid(standard, 1), [](int) { return 0.0; }},
      {DataProcess::gaussian_ar1(spec.ar_coefficient),
       [&](int t) { return ar_rho_bound(spec.ar_coefficient, lip, mean_abs_noise, t); }},
      {DataProcess::binary_half_ar(), [&](int t) { return binary_half_ar_rho_bound(lip, t); }},
  };

  ExperimentOutput out;
  const int lags = static_cast<int>(spec.lags.size());
  std::vector<RhoEstimate> rho(cases.size() * lags);
  parallel_for(static_cast<int>(rho.size()), jobs, [&](int task) {
    const int c = task / lags;
    const int l = task % lags;
    rho[task] = rho_hat(cases[c].process, k, spec.lags[l], spec.rho_replications, spec.rho_length,
                        sweep_seed(spec.base_seed, c, spec.lags[l]));
  });
  LineChart rho_chart{"Estimated dependence coefficients", "lag t", "rho_t", {}};
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const std::string name = cases[c].process.name();
    PlotSeries est{name + " estimate", {}, {}, {}};
    PlotSeries env{name + " envelope", {}, {}, {}};
    for (int l = 0; l < lags; ++l) {
      const RhoEstimate& r = rho[c * lags + l];
      const double bound = cases[c].envelope(r.t);
      ResultRow row = make_row(spec, name, "rho", r.t, "rho_hat", r.value, r.std_error, spec.rho_replications);
      row.seed = sweep_seed(spec.base_seed, static_cast<int>(c), r.t);
      out.rows.push_back(row);
      out.rows.push_back(make_row(spec, name, "rho", r.t, "rho_signed", r.signed_value, r.std_error, spec.rho_replications));
      out.rows.push_back(make_row(spec, name, "rho", r.t, "envelope", bound, 0.0, 0));
      est.x.push_back(r.t);
      est.y.push_back(r.value);
      est.error.push_back(r.std_error);
      env.x.push_back(r.t);
      env.y.push_back(bound);
    }
    rho_chart.series.push_back(std::move(est));
    if (c > 0) rho_chart.series.push_back(std::move(env));
  }
  out.charts.push_back({spec.name + "_rho.svg", rho_chart});
  const DependenceConstants ar = ar_sigma_gamma(spec.ar_coefficient, lip, mean_abs_noise);
  out.rows.push_back(make_row(spec, "ar", "constants", 0.0, "sigma", ar.sigma, 0.0, 0));
  const DependenceConstants bin = binary_half_ar_constants(lip);
  out.rows.push_back(make_row(spec, "binary_half_ar", "constants", 0.0, "sigma", bin.sigma, 0.0, 0));
  out.rows.push_back(make_row(spec, "binary_half_ar", "constants", 0.0, "gamma", *bin.gamma, 0.0, 0));

  // Mixture weights of a hidden Markov chain fitted with the (misspecified) independent mixture model.
  if (!spec.hmm_sizes.empty()) {
    const MatrixXd& p = spec.hmm_transition;
    if (p.rows() != static_cast<Eigen::Index>(spec.hmm_means.size()))
      throw ConfigError("hmm_transition must be square with one row per emission mean");
    const DictionaryMixture emissions = gaussian_dictionary(spec.hmm_means, 1.0);
    const DataProcess hmm = DataProcess::hidden_markov(p, emissions);
    const Model model = Model::dictionary_mixture(emissions);
    const VectorXd pi = stationary_distribution(p);
    const double c = hmm_minorization(p, 1);
    const int sizes = static_cast<int>(spec.hmm_sizes.size());
    const int reps = spec.repetitions;
    std::vector<double> errors(sizes * reps);
    parallel_for(sizes * reps, jobs, [&](int task) {
      const int i = task / reps;
      const int rep = task % reps;
      const std::uint64_t seed = sweep_seed(spec.base_seed, 100 + i, rep);
      const Sample x = hmm.generate(spec.hmm_sizes[i], stream_seed(seed, 0));
      const VectorXd w = psga(k, model, x, spec.psga.config(spec.hmm_sizes[i], k, stream_seed(seed, 1))).theta_hat;
      errors[task] = (w - pi).norm();
    });
    LineChart hmm_chart{"Hidden Markov weights: error against n", "n", "||theta_hat - pi||", {}};
    PlotSeries err{"mmd", {}, {}, {}};
    PlotSeries bound_series{"MMD bound", {}, {}, {}};
    for (int i = 0; i < sizes; ++i) {
      const int n = spec.hmm_sizes[i];
      std::vector<double> v(errors.begin() + i * reps, errors.begin() + (i + 1) * reps);
      for (int r = 0; r < reps; ++r)
        out.repetitions.push_back({spec.name, "mmd", "hmm", static_cast<double>(n), r,
                                   sweep_seed(spec.base_seed, 100 + i, r), "weight_error", v[r]});
      const double m = mean_of(v);
      const double b = bound_hmm(n, c, 1).value;
      out.rows.push_back(make_row(spec, "mmd", "hmm", n, "weight_error", m, stdev_of(v), reps));
      out.rows.push_back(make_row(spec, "mmd", "hmm", n, "bound_hmm", b, 0.0, 0));
      err.x.push_back(n);
      err.y.push_back(m);
      err.error.push_back(stdev_of(v) / std::sqrt(static_cast<double>(reps)));
      bound_series.x.push_back(n);
      bound_series.y.push_back(b);
    }
    hmm_chart.series.push_back(std::move(err));
    hmm_chart.series.push_back(std::move(bound_series));
    out.charts.push_back({spec.name + "_hmm.svg", hmm_chart});
    out.rows.push_back(make_row(spec, "mmd", "hmm", 0.0, "minorization_c", c, 0.0, 0));
    out.notes.push_back("hmm: bound_hmm is a bound on the MMD between the fitted mixture and the stationary law, "
                        "shown for its 1/sqrt(n) shape");
    out.notes.push_back("hmm: " + describe_psga(spec.psga, 0));
  }
  out.notes.push_back("rho_hat: " + std::to_string(spec.rho_replications) + " replications of two trajectories of length " +
                      std::to_string(spec.rho_length) + "; stdev column holds the standard error");
  out.notes.push_back("envelopes: ar uses ||A||^t 2 L E|eps| / (1 - ||A||), binary_half_ar uses L / 2^t");
  return out;
}

ExperimentOutput run_experiment(const ExperimentSpec& spec, int jobs) {
  switch (spec.kind) {
    case ExperimentKind::Table1: return run_table1(spec, jobs);
    case ExperimentKind::EpsSweep: return run_eps_sweep(spec, jobs);
    case ExperimentKind::DimSweep: return run_dim_sweep(spec, jobs);
    case ExperimentKind::Mixture: return run_mixture(spec, jobs);
    case ExperimentKind::Dependence: return run_dependence_demo(spec, jobs);
  }
  throw ConfigError("unknown experiment kind");
}

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols{"experiment", "method",      "setting",     "sweep",
                                             "metric",     "value",       "stdev",       "repetitions",
                                             "seed",       "reference_value", "reference_stdev", "reference_id"};
  return cols;
}

const std::vector<std::string>& repetition_columns() {
  static const std::vector<std::string> cols{"experiment", "method", "setting", "sweep", "rep", "seed", "metric", "value"};
  return cols;
}

std::string results_csv(const ExperimentOutput& out) {
  std::vector<ResultRow> rows = out.rows;
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.method, a.setting, a.sweep, a.metric) < std::tie(b.method, b.setting, b.sweep, b.metric);
  });
  std::string text = csv_line(result_columns()) + "\n";
  for (const auto& r : rows) {
    text += csv_line({r.experiment, r.method, r.setting, format_number(r.sweep), r.metric, format_number(r.value),
                      format_number(r.stdev), std::to_string(r.repetitions), std::to_string(r.seed),
                      r.reference_value ? format_number(*r.reference_value) : "",
                      r.reference_stdev ? format_number(*r.reference_stdev) : "", r.reference_id}) +
            "\n";
  }
  return text;
}

std::string repetitions_csv(const ExperimentOutput& out) {
  std::vector<RepetitionRow> rows = out.repetitions;
  std::stable_sort(rows.begin(), rows.end(), [](const RepetitionRow& a, const RepetitionRow& b) {
    return std::tie(a.method, a.setting, a.sweep, a.rep, a.metric) <
           std::tie(b.method, b.setting, b.sweep, b.rep, b.metric);
  });
  std::string text = csv_line(repetition_columns()) + "\n";
  for (const auto& r : rows) {
    text += csv_line({r.experiment, r.method, r.setting, format_number(r.sweep), std::to_string(r.rep),
                      std::to_string(r.seed), r.metric, format_number(r.value)}) +
            "\n";
  }
  return text;
}

void write_outputs(const ExperimentOutput& out, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream file(fs::path(dir) / name, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    file << text;
  };
  write("results.csv", results_csv(out));
  write("repetitions.csv", repetitions_csv(out));
  for (const auto& c : out.charts) write(c.file, render_svg(c.chart));
  std::string notes;
  for (const auto& n : out.notes) notes += n + "\n";
  write("notes.txt", notes);
}

}  // namespace mmdest

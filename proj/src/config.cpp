#include "mmdest/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mmdest/errors.hpp"

namespace mmdest {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& field) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    field = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_kernel(const json& j, KernelSpec& k) {
  if (j.is_string()) {
    if (j.get<std::string>() != "default") throw ConfigError("kernel must be \"default\" or an object");
    k.dimension_default = true;
    return;
  }
  reject_unknown(j, {"family", "gamma"}, "kernel");
  std::string family = "gaussian";
  read(j, "family", family);
  k.family = kernel_family_from_string(family);
  if (!j.contains("gamma")) throw ConfigError("kernel object needs 'gamma'");
  read(j, "gamma", k.gamma);
  k.dimension_default = false;
}

void read_psga(const json& j, PsgaSettings& p) {
  reject_unknown(j, {"batch_size", "steps", "schedule", "step_scale", "scale_by_bandwidth", "averaging", "average_tail"},
                 "psga");
  read(j, "batch_size", p.batch_size);
  read(j, "steps", p.steps);
  if (j.contains("schedule")) {
    const std::string kind = j.at("schedule").get<std::string>();
    if (kind == "inverse_sqrt") p.schedule.kind = StepKind::InverseSqrt;
    else if (kind == "constant") p.schedule.kind = StepKind::Constant;
    else throw ConfigError("psga.schedule must be \"inverse_sqrt\" or \"constant\"");
  }
  read(j, "step_scale", p.schedule.scale);
  read(j, "scale_by_bandwidth", p.scale_by_bandwidth);
  read(j, "averaging", p.averaging);
  read(j, "average_tail", p.average_tail);
  if (p.batch_size < 0 || p.steps < 1 || !(p.schedule.scale > 0.0))
    throw ConfigError("psga needs batch_size >= 0, steps >= 1 and step_scale > 0");
}

void read_mixture(const json& j, ExperimentSpec& s) {
  reject_unknown(j, {"weights", "means", "dictionary", "outlier", "mae_draws", "em"}, "mixture");
  read(j, "weights", s.mixture_weights);
  read(j, "means", s.mixture_means);
  if (j.contains("dictionary")) {
    const json& d = j.at("dictionary");
    reject_unknown(d, {"lo", "hi", "step"}, "mixture.dictionary");
    read(d, "lo", s.dictionary_lo);
    read(d, "hi", s.dictionary_hi);
    read(d, "step", s.dictionary_step);
  }
  read(j, "outlier", s.outlier);
  read(j, "mae_draws", s.mae_draws);
  if (j.contains("em")) {
    const json& e = j.at("em");
    reject_unknown(e, {"components", "restarts", "max_iter", "tol"}, "mixture.em");
    read(e, "components", s.em.components);
    read(e, "restarts", s.em.restarts);
    read(e, "max_iter", s.em.max_iter);
    read(e, "tol", s.em.tol);
  }
}

void read_dependence(const json& j, ExperimentSpec& s) {
  reject_unknown(j,
                 {"lags", "rho_replications", "rho_length", "ar_coefficient", "hmm_transition", "hmm_means",
                  "hmm_sizes"},
                 "dependence");
  read(j, "lags", s.lags);
  read(j, "rho_replications", s.rho_replications);
  read(j, "rho_length", s.rho_length);
  read(j, "ar_coefficient", s.ar_coefficient);
  read(j, "hmm_means", s.hmm_means);
  read(j, "hmm_sizes", s.hmm_sizes);
  if (j.contains("hmm_transition")) {
    std::vector<std::vector<double>> rows;
    read(j, "hmm_transition", rows);
    const auto dim = static_cast<Eigen::Index>(rows.size());
    MatrixXd p(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != dim) throw ConfigError("hmm_transition must be square");
      for (Eigen::Index c = 0; c < dim; ++c) p(i, c) = rows[i][c];
    }
    s.hmm_transition = p;
  }
}

void validate(const ExperimentSpec& s) {
  if (s.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  const bool sweeping = s.kind == ExperimentKind::EpsSweep || s.kind == ExperimentKind::DimSweep;
  if (sweeping && s.sweep.empty()) throw ConfigError("sweep grid must be nonempty");
  if (s.epsilon < 0.0 || s.epsilon >= 0.5) throw ConfigError("epsilon must lie in [0, 0.5)");
}

}  // namespace

ExperimentSpec experiment_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"experiment", "name", "n", "d", "epsilon", "repetitions", "seed", "kernel", "psga", "contaminations",
                  "methods", "sweep", "common_random_numbers", "mixture", "dependence"},
                 "config");
  if (!j.contains("experiment")) throw ConfigError("config needs an 'experiment' key");
  ExperimentSpec s = ExperimentSpec::defaults(experiment_kind_from_string(j.at("experiment").get<std::string>()));
  read(j, "name", s.name);
  read(j, "n", s.n);
  read(j, "d", s.d);
  read(j, "epsilon", s.epsilon);
  read(j, "repetitions", s.repetitions);
  read(j, "seed", s.base_seed);
  if (j.contains("kernel")) read_kernel(j.at("kernel"), s.kernel);
  if (j.contains("psga")) read_psga(j.at("psga"), s.psga);
  read(j, "contaminations", s.contaminations);
  read(j, "methods", s.methods);
  read(j, "sweep", s.sweep);
  read(j, "common_random_numbers", s.common_random_numbers);
  if (j.contains("mixture")) read_mixture(j.at("mixture"), s);
  if (j.contains("dependence")) read_dependence(j.at("dependence"), s);
  validate(s);
  return s;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config " + path);
  std::ostringstream text;
  text << file.rdbuf();
  return experiment_spec_from_json(text.str());
}

std::string experiment_spec_to_json(const ExperimentSpec& s) {
  json j;
  j["experiment"] = to_string(s.kind);
  j["name"] = s.name;
  j["n"] = s.n;
  j["d"] = s.d;
  j["epsilon"] = s.epsilon;
  j["repetitions"] = s.repetitions;
  j["seed"] = s.base_seed;
  if (s.kernel.dimension_default) j["kernel"] = "default";
  else j["kernel"] = {{"family", to_string(s.kernel.family)}, {"gamma", s.kernel.gamma}};
  j["psga"] = {{"batch_size", s.psga.batch_size},
               {"steps", s.psga.steps},
               {"schedule", s.psga.schedule.kind == StepKind::InverseSqrt ? "inverse_sqrt" : "constant"},
               {"step_scale", s.psga.schedule.scale},
               {"scale_by_bandwidth", s.psga.scale_by_bandwidth},
               {"averaging", s.psga.averaging},
               {"average_tail", s.psga.average_tail}};
  j["contaminations"] = s.contaminations;
  j["methods"] = s.methods;
  j["sweep"] = s.sweep;
  j["common_random_numbers"] = s.common_random_numbers;
  if (s.kind == ExperimentKind::Mixture) {
    j["mixture"] = {{"weights", s.mixture_weights},
                    {"means", s.mixture_means},
                    {"dictionary", {{"lo", s.dictionary_lo}, {"hi", s.dictionary_hi}, {"step", s.dictionary_step}}},
                    {"outlier", s.outlier},
                    {"mae_draws", s.mae_draws},
                    {"em",
                     {{"components", s.em.components},
                      {"restarts", s.em.restarts},
                      {"max_iter", s.em.max_iter},
                      {"tol", s.em.tol}}}};
  }
  if (s.kind == ExperimentKind::Dependence) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < s.hmm_transition.rows(); ++i)
      rows.emplace_back(s.hmm_transition.row(i).begin(), s.hmm_transition.row(i).end());
    j["dependence"] = {{"lags", s.lags},
                       {"rho_replications", s.rho_replications},
                       {"rho_length", s.rho_length},
                       {"ar_coefficient", s.ar_coefficient},
                       {"hmm_transition", rows},
                       {"hmm_means", s.hmm_means},
                       {"hmm_sizes", s.hmm_sizes}};
  }
  return j.dump(2) + "\n";
}

}  // namespace mmdest

#pragma once

#include <string>

#include "mmdest/experiments.hpp"

namespace mmdest {

/// Builds an experiment from a JSON document. The "experiment" key selects the study and its
/// defaults; every other key overrides one field. Unknown keys are rejected.
///
///   {
///     "experiment": "eps_sweep",
///     "n": 5000, "d": 10, "repetitions": 10, "seed": 7,
///     "kernel": {"family": "gaussian", "gamma": 3.0},       // or "default" (gamma^2 = d)
///     "psga": {"batch_size": 500, "steps": 800, "schedule": "inverse_sqrt", "step_scale": 0.25,
///              "scale_by_bandwidth": true, "averaging": true, "average_tail": 0.5},
///     "contaminations": ["N(5)"], "methods": ["mmd"], "sweep": [0.0, 0.1, 0.2]
///   }
///
/// Mixture keys live under "mixture" and dependence keys under "dependence".
ExperimentSpec experiment_spec_from_json(const std::string& text);
ExperimentSpec load_experiment_spec(const std::string& path);

/// The fully resolved specification, in the same format.
std::string experiment_spec_to_json(const ExperimentSpec& spec);

}  // namespace mmdest

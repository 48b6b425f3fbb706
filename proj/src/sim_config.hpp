#pragma once

#include <string>

#include "montecarlo.hpp"

namespace demqkd::montecarlo {

// Simulation configuration file (JSON). Every key is optional except the two
// detector curves; unknown keys are errors.
//
//   {
//     "simulation": { "n_pulses": 1000000, "seed": 1, "workers": 1,
//                     "channel_transmittance": 1.0, "nominal_arrival_time": 0.0,
//                     "double_click_policy": "random_assign" | "discard" },
//     "source":     { "statistics": "single_photon" | "coherent" | "fock", "mu": 1.0 },
//     "detectors":  { "curve0": <curve>, "curve1": <curve>, "dark0": 0.0, "dark1": 0.0 },
//     "attack":     { "enabled": true, "t0": 0.0, "t1": 0.0,
//                     "statistics": "single_photon", "mu_t0": 1.0, "mu_t1": 1.0 }
//   }
//
// <curve> holds exactly one source:
//   { "gate": { "center": 0, "plateau_width": 1, "edge_scale": 0.05, "peak_efficiency": 0.1 } }
//   { "constant": { "eta": 0.1, "from": -100, "to": 100 } }
//   { "tabulated": [[t, eta], ...] }
//   { "file": "curves.csv", "column": "eta0" | "eta1", "calibration": 1.0 }
// Relative file paths are resolved against `base_dir`.
SimConfig parse_sim_config(const std::string& json_text, const std::string& base_dir = ".");

std::string stats_to_json(const SimStats& stats);
// Header row plus one value row.
std::string stats_to_csv(const SimStats& stats);

}  // namespace demqkd::montecarlo

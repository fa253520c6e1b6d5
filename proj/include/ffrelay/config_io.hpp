#pragma once

#include <string>

#include "ffrelay/channel.hpp"
#include "ffrelay/dual_solver.hpp"

namespace ffrelay {

/// Time-simulator extension keys (verify-lemma1 fixtures).
struct SimKeys {
    long sim_samples = 1 << 17;
    long warmup = 2048;
    int segment_len = 512;
    int num_segments = 256;
};

struct LoadedConfig {
    SystemConfig sys;
    SolverOptions solver;
    SimKeys sim;
};

/// Built-in profiles: "desk" (N=256, fast) and "paper" (N=1024, the
/// experiment-faithful grid). Both share every other default.
LoadedConfig default_config(const std::string& profile = "desk");

/// Key/value text config ("key = value", '#' comments). Power and noise keys
/// are dB-scale at this boundary and converted to linear units on load.
/// Unknown keys are an error.
LoadedConfig parse_config_file(const std::string& path);

/// Applies a profile's grid size on top of an existing config.
void apply_profile(LoadedConfig& cfg, const std::string& profile);

}  // namespace ffrelay

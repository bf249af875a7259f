#pragma once

#include "covband/sim.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace covband {

// Strict JSON experiment document:
// {
//   "instance": {"theta": 0, "sigma": 1,
//                "covariate": {"family": "uniform", "lo": -1, "hi": 1}},
//   "policies": ["oracle", "myopic", {"type": "nearly_myopic", "c": 1},
//                {"type": "forced", "q": 0.0833333333333333}],
//   "horizons": [250, 500],
//   "replications": 500,
//   "seed": 2009,
//   "record_trajectories": false
// }
// Unknown fields are rejected. Throws ParseError (malformed JSON, with line and
// column) or ValidationError (field path and violated invariant).
ExperimentConfig parse_config(std::string_view text);

// Canonical JSON rendering of a parsed config.
std::string canonical_config(const ExperimentConfig& config);

// FNV-1a 64 of the canonical rendering, as 16 hex digits.
std::string config_digest(const ExperimentConfig& config);

struct RunManifest {
    std::string config_digest;
    std::string tool_version;
    std::uint64_t master_seed = 0;
    std::vector<std::string> outputs;
    double wall_time = 0.0;
};

std::string to_json(const RunManifest& manifest);

inline constexpr const char* kToolVersion = "0.1.0";

// Built-in reference setups with Gaussian noise sigma = 1 and theta = 0:
// 'i' uses X ~ Uniform[-1, 1], 'ii' uses X = +-1 with probability 1/2.
ExperimentConfig reference_setup(std::string_view which, std::uint64_t replications, std::uint64_t seed);

} // namespace covband

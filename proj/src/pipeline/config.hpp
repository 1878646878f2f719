// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include "evalharness/harness.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hyperadapt::pipeline {

// Everything a run depends on. Defaults follow the full-scale
// hyperparameters (lr 1e-4, beta 5e-3, 1000 meta epochs, j = 20, 5 support
// trajectories).
struct RunConfig {
    evalharness::ExperimentConfig experiment;
    evalharness::ScenarioKind scenario = evalharness::ScenarioKind::b;
    // Platforms the scenario is run for: (a) trains on each, (c) and (c+k)
    // exclude each. Empty means every platform for (a) and baxter otherwise.
    std::vector<robotsim::Platform> platforms;
    std::vector<std::size_t> k_sweep{0, 10, 20};
    std::vector<metalearn::Method> methods{metalearn::kMethods, metalearn::kMethods + 4};
    std::uint64_t seed = 0;
    std::size_t robots_per_platform = 100;
    std::size_t test_robots = 3;
    // Meta checkpoints are rewritten every this many epochs (0: only at the end).
    std::size_t checkpoint_every = 50;
    std::filesystem::path out = "out";
};

// Sets one option by its config-file key. Throws Error(config) naming the key.
void set_option(RunConfig& config, std::string_view key, std::string_view value);

// "key = value" lines; '#' starts a comment. Unknown keys and malformed values
// are errors that name `origin` and the line.
RunConfig parse_config(std::string_view text, std::string_view origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// Every option except `out` and `methods` as sorted "key = value" lines; the
// input of config_hash. Parsing it back yields an equivalent config.
std::string serialize(const RunConfig& config);
// FNV-1a of serialize(), 16 hex digits.
std::string config_hash(const RunConfig& config);

// The scenario instances a config describes, in a fixed order.
std::vector<evalharness::ScenarioSpec> variants(const RunConfig& config);
// File-name tag: "a-yumi", "b", "c-baxter", "c+20-baxter".
std::string variant_tag(const evalharness::ScenarioSpec& spec);
// Scenario column of result files: "a", "b", "c" or "c+<k>".
std::string scenario_label(const evalharness::ScenarioSpec& spec);

} // namespace hyperadapt::pipeline

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

#include "robotsim/kinematics.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace hyperadapt::evalharness {

enum class ScenarioKind { a, b, c, c_plus_k };

std::string_view scenario_name(ScenarioKind kind); // "a", "b", "c", "c+k"
ScenarioKind parse_scenario(std::string_view name);

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::b;
    std::vector<robotsim::Platform> train_platforms;
    // (a): the single platform; (c), (c+k): the excluded platform. Unused
    // for (b), which tests every platform.
    robotsim::Platform platform = robotsim::Platform::baxter;
    // Tasks of the excluded platform added to training in (c+k).
    std::size_t injected = 0;
    std::size_t robots_per_platform = 100;
    std::size_t test_robots = 3;
    std::uint64_t seed = 0;
};

// Train platforms follow from the kind: (a) {platform}, (b) all four,
// (c) and (c+k) all but `platform`.
ScenarioSpec make_scenario(ScenarioKind kind, robotsim::Platform platform, std::size_t injected,
                           std::size_t robots_per_platform, std::size_t test_robots, std::uint64_t seed);

std::vector<robotsim::Platform> test_platforms(const ScenarioSpec& spec);

// Robot i of a platform comes from the stream "robots/train/<platform>/<i>"
// under the scenario seed, so scenarios that share a platform share its
// robots. Injected robots are the first k of the excluded platform.
std::vector<robotsim::RobotInstance> train_robots(const ScenarioSpec& spec);

// Novel robots from "robots/test/<platform>/<r>", indexed 1000 + r.
std::vector<robotsim::RobotInstance> test_robots(const ScenarioSpec& spec, robotsim::Platform platform);

inline constexpr int kTestRobotIndexBase = 1000;

} // namespace hyperadapt::evalharness

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

#include "evalharness/scenario.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"

#include <algorithm>
#include <string>

namespace hyperadapt::evalharness {

std::string_view scenario_name(ScenarioKind kind)
{
    switch (kind) {
    case ScenarioKind::a: return "a";
    case ScenarioKind::b: return "b";
    case ScenarioKind::c: return "c";
    case ScenarioKind::c_plus_k: return "c+k";
    }
    return "?";
}

ScenarioKind parse_scenario(std::string_view name)
{
    for (const ScenarioKind k : {ScenarioKind::a, ScenarioKind::b, ScenarioKind::c, ScenarioKind::c_plus_k}) {
        if (scenario_name(k) == name) {
            return k;
        }
    }
    throw Error(ErrorKind::invalid_argument, "unknown scenario '" + std::string(name) + "' (expected a, b, c or c+k)");
}

ScenarioSpec make_scenario(ScenarioKind kind, robotsim::Platform platform, std::size_t injected,
                           std::size_t robots_per_platform, std::size_t test_robots, std::uint64_t seed)
{
    if (robots_per_platform == 0 || test_robots == 0) {
        throw Error(ErrorKind::invalid_argument, "scenario: robot counts must be positive");
    }
    if (kind != ScenarioKind::c_plus_k && injected != 0) {
        throw Error(ErrorKind::invalid_argument, "scenario: injected tasks require scenario c+k");
    }
    ScenarioSpec s;
    s.kind = kind;
    s.platform = platform;
    s.injected = injected;
    s.robots_per_platform = robots_per_platform;
    s.test_robots = test_robots;
    s.seed = seed;
    for (const robotsim::Platform p : robotsim::kPlatforms) {
        const bool include = kind == ScenarioKind::a ? p == platform
                             : kind == ScenarioKind::b ? true
                                                       : p != platform;
        if (include) {
            s.train_platforms.push_back(p);
        }
    }
    return s;
}

std::vector<robotsim::Platform> test_platforms(const ScenarioSpec& spec)
{
    if (spec.kind == ScenarioKind::b) {
        return {robotsim::kPlatforms.begin(), robotsim::kPlatforms.end()};
    }
    return {spec.platform};
}

namespace {

robotsim::RobotInstance train_robot(const ScenarioSpec& spec, robotsim::Platform p, std::size_t i)
{
    const std::string stream = "robots/train/" + std::string(robotsim::platform_name(p)) + "/" + std::to_string(i);
    return robotsim::sample_robot(robotsim::platform_template(p), stream_seed(spec.seed, stream),
                                  static_cast<int>(i));
}

} // namespace

std::vector<robotsim::RobotInstance> train_robots(const ScenarioSpec& spec)
{
    std::vector<robotsim::RobotInstance> robots;
    for (const robotsim::Platform p : spec.train_platforms) {
        for (std::size_t i = 0; i < spec.robots_per_platform; ++i) {
            robots.push_back(train_robot(spec, p, i));
        }
    }
    for (std::size_t i = 0; i < spec.injected; ++i) {
        robots.push_back(train_robot(spec, spec.platform, i));
    }
    return robots;
}

std::vector<robotsim::RobotInstance> test_robots(const ScenarioSpec& spec, robotsim::Platform platform)
{
    std::vector<robotsim::RobotInstance> robots;
    for (std::size_t r = 0; r < spec.test_robots; ++r) {
        const std::string stream =
            "robots/test/" + std::string(robotsim::platform_name(platform)) + "/" + std::to_string(r);
        robots.push_back(robotsim::sample_robot(robotsim::platform_template(platform),
                                                stream_seed(spec.seed, stream),
                                                kTestRobotIndexBase + static_cast<int>(r)));
    }
    return robots;
}

} // namespace hyperadapt::evalharness

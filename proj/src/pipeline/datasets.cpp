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

#include "pipeline/datasets.hpp"

#include "common/error.hpp"
#include "models/checkpoint.hpp"

namespace hyperadapt::pipeline {

namespace {

constexpr int kDatasetVersion = 1;

std::vector<double> flat_goals(std::span<const robotsim::TaskSample> samples)
{
    std::vector<double> out;
    for (const auto& s : samples) {
        out.insert(out.end(), s.goal.position.data(), s.goal.position.data() + 3);
    }
    return out;
}

std::vector<double> flat_trajectories(std::span<const robotsim::TaskSample> samples)
{
    std::vector<double> out;
    for (const auto& s : samples) {
        const auto f = s.tau.flat();
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

std::vector<robotsim::TaskSample> read_samples(const Container& c, const std::string& prefix,
                                               const std::vector<std::size_t>& canonical_index, int robot_index,
                                               const robotsim::CanonicalSet& canonical)
{
    const std::vector<double> goals = models::read_block(c, prefix + "/goal");
    const std::vector<double> taus = models::read_block(c, prefix + "/tau");
    const std::size_t n = canonical_index.size();
    if (goals.size() != 3 * n || taus.size() != robotsim::kTrajectorySize * n) {
        throw Error(ErrorKind::io, "dataset: block '" + prefix + "' does not match its sample count");
    }
    std::vector<robotsim::TaskSample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (canonical_index[i] >= canonical.entries.size()) {
            throw Error(ErrorKind::io, "dataset: canonical index out of range in '" + prefix + "'");
        }
        out[i].goal.position = Eigen::Vector3d(goals[3 * i], goals[3 * i + 1], goals[3 * i + 2]);
        out[i].tau = robotsim::Trajectory::from_flat(
            std::span(taus).subspan(i * robotsim::kTrajectorySize, robotsim::kTrajectorySize), robot_index);
        out[i].canonical_index = canonical_index[i];
    }
    return out;
}

std::vector<std::size_t> canonical_indices(std::span<const robotsim::TaskSample> samples)
{
    std::vector<std::size_t> out;
    for (const auto& s : samples) {
        out.push_back(s.canonical_index);
    }
    return out;
}

void expect_dataset(const Container& c, const std::string& kind)
{
    if (c.manifest.value("kind", std::string()) != kind || c.manifest.value("version", 0) != kDatasetVersion) {
        throw Error(ErrorKind::io, "dataset: expected a version " + std::to_string(kDatasetVersion) + " '" + kind
                                       + "' file");
    }
}

robotsim::RobotInstance robot_from_json(const nlohmann::json& j)
{
    const robotsim::Platform p = robotsim::parse_platform(j.at("platform").get<std::string>());
    return robotsim::robot_from_scales(robotsim::platform_template(p),
                                       j.at("scale").get<std::array<double, robotsim::kJoints>>(),
                                       j.at("seed").get<std::uint64_t>(), j.at("index").get<int>());
}

} // namespace

nlohmann::json dataset_config_json(const robotsim::DatasetConfig& config)
{
    return {
        {"goals_per_robot", config.goals_per_robot},
        {"support_size", config.support_size},
        {"pool_size", config.pool_size},
        {"goal_spread", config.goal_spread},
        {"planner",
         {{"damping", config.planner.damping},
          {"tolerance", config.planner.tolerance},
          {"max_iterations", config.planner.max_iterations},
          {"jacobian_step", config.planner.jacobian_step}}},
    };
}

robotsim::DatasetConfig dataset_config_from_json(const nlohmann::json& j)
{
    robotsim::DatasetConfig c;
    c.goals_per_robot = j.at("goals_per_robot").get<std::size_t>();
    c.support_size = j.at("support_size").get<std::size_t>();
    c.pool_size = j.at("pool_size").get<std::size_t>();
    c.goal_spread = j.at("goal_spread").get<double>();
    const auto& p = j.at("planner");
    c.planner.damping = p.at("damping").get<double>();
    c.planner.tolerance = p.at("tolerance").get<double>();
    c.planner.max_iterations = p.at("max_iterations").get<int>();
    c.planner.jacobian_step = p.at("jacobian_step").get<double>();
    return c;
}

Container encode_canonical_set(const robotsim::CanonicalSet& set, std::uint64_t seed,
                               const robotsim::DatasetConfig& config, const std::string& config_hash)
{
    Container c;
    c.manifest["kind"] = "canonical_set";
    c.manifest["version"] = kDatasetVersion;
    c.manifest["config_hash"] = config_hash;
    c.manifest["seed"] = seed;
    c.manifest["platform"] = robotsim::platform_name(set.robot.platform);
    c.manifest["dataset"] = dataset_config_json(config);
    c.manifest["count"] = set.entries.size();
    c.manifest["blocks"] = nlohmann::json::array();
    std::vector<double> goals;
    std::vector<double> taus;
    std::vector<double> ends;
    for (const auto& e : set.entries) {
        goals.insert(goals.end(), e.goal.position.data(), e.goal.position.data() + 3);
        const auto f = e.tau.flat();
        taus.insert(taus.end(), f.begin(), f.end());
        ends.insert(ends.end(), e.end_state.data(), e.end_state.data() + 3);
    }
    models::add_block(c, "goal", goals);
    models::add_block(c, "tau", taus);
    models::add_block(c, "end_state", ends);
    return c;
}

robotsim::CanonicalSet decode_canonical_set(const Container& c)
{
    expect_dataset(c, "canonical_set");
    robotsim::CanonicalSet set;
    const robotsim::Platform p = robotsim::parse_platform(c.manifest.at("platform").get<std::string>());
    set.robot = robotsim::nominal_robot(robotsim::platform_template(p), -1);
    const auto n = c.manifest.at("count").get<std::size_t>();
    const std::vector<double> goals = models::read_block(c, "goal");
    const std::vector<double> taus = models::read_block(c, "tau");
    const std::vector<double> ends = models::read_block(c, "end_state");
    if (goals.size() != 3 * n || ends.size() != 3 * n || taus.size() != robotsim::kTrajectorySize * n) {
        throw Error(ErrorKind::io, "dataset: canonical blocks do not match the entry count");
    }
    for (std::size_t i = 0; i < n; ++i) {
        robotsim::CanonicalEntry e;
        e.goal.position = Eigen::Vector3d(goals[3 * i], goals[3 * i + 1], goals[3 * i + 2]);
        e.tau = robotsim::Trajectory::from_flat(
            std::span(taus).subspan(i * robotsim::kTrajectorySize, robotsim::kTrajectorySize), -1);
        e.end_state = Eigen::Vector3d(ends[3 * i], ends[3 * i + 1], ends[3 * i + 2]);
        set.entries.push_back(std::move(e));
    }
    return set;
}

Container regenerate_canonical_set(const nlohmann::json& manifest)
{
    const robotsim::Platform p = robotsim::parse_platform(manifest.at("platform").get<std::string>());
    const auto seed = manifest.at("seed").get<std::uint64_t>();
    const robotsim::DatasetConfig config = dataset_config_from_json(manifest.at("dataset"));
    const robotsim::CanonicalSet set =
        robotsim::build_canonical_set(robotsim::nominal_robot(robotsim::platform_template(p), -1), seed, config);
    return encode_canonical_set(set, seed, config, manifest.at("config_hash").get<std::string>());
}

Container encode_tasks(std::span<const robotsim::MetaTaskDataset> tasks, const std::string& scenario,
                       std::uint64_t seed, const robotsim::DatasetConfig& config, const std::string& config_hash)
{
    Container c;
    c.manifest["kind"] = "tasks";
    c.manifest["version"] = kDatasetVersion;
    c.manifest["config_hash"] = config_hash;
    c.manifest["scenario"] = scenario;
    c.manifest["seed"] = seed;
    c.manifest["dataset"] = dataset_config_json(config);
    c.manifest["robots"] = nlohmann::json::array();
    c.manifest["blocks"] = nlohmann::json::array();
    for (const auto& t : tasks) {
        const std::string name = t.robot.name();
        c.manifest["robots"].push_back({
            {"name", name},
            {"platform", robotsim::platform_name(t.robot.platform)},
            {"index", t.robot.index},
            {"seed", t.robot.seed},
            {"scale", t.robot.scale},
            {"support_canonical", canonical_indices(t.support)},
            {"query_canonical", canonical_indices(t.query)},
        });
        models::add_block(c, name + "/support/goal", flat_goals(t.support));
        models::add_block(c, name + "/support/tau", flat_trajectories(t.support));
        models::add_block(c, name + "/query/goal", flat_goals(t.query));
        models::add_block(c, name + "/query/tau", flat_trajectories(t.query));
    }
    return c;
}

std::vector<robotsim::MetaTaskDataset> decode_tasks(const Container& c, const robotsim::CanonicalSet& canonical)
{
    expect_dataset(c, "tasks");
    std::vector<robotsim::MetaTaskDataset> tasks;
    for (const auto& r : c.manifest.at("robots")) {
        robotsim::MetaTaskDataset t;
        t.robot = robot_from_json(r);
        const std::string name = r.at("name").get<std::string>();
        if (name != t.robot.name()) {
            throw Error(ErrorKind::io, "dataset: robot entry '" + name + "' is inconsistent");
        }
        t.support = read_samples(c, name + "/support", r.at("support_canonical").get<std::vector<std::size_t>>(),
                                 t.robot.index, canonical);
        t.query = read_samples(c, name + "/query", r.at("query_canonical").get<std::vector<std::size_t>>(),
                               t.robot.index, canonical);
        tasks.push_back(std::move(t));
    }
    return tasks;
}

Container regenerate_tasks(const nlohmann::json& manifest, const robotsim::CanonicalSet& canonical)
{
    const auto seed = manifest.at("seed").get<std::uint64_t>();
    const robotsim::DatasetConfig config = dataset_config_from_json(manifest.at("dataset"));
    std::vector<robotsim::MetaTaskDataset> tasks;
    for (const auto& r : manifest.at("robots")) {
        tasks.push_back(robotsim::plan_task(robot_from_json(r), canonical, seed, config));
    }
    return encode_tasks(tasks, manifest.at("scenario").get<std::string>(), seed, config,
                        manifest.at("config_hash").get<std::string>());
}

} // namespace hyperadapt::pipeline

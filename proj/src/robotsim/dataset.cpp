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

#include "robotsim/dataset.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace hyperadapt::robotsim {

namespace {

std::optional<Trajectory> try_plan(const RobotInstance& robot, const Goal& goal,
                                   const PlannerConfig& planner)
{
    try {
        return plan_trajectory(robot, goal, planner);
    } catch (const UnreachableGoalError&) {
        return std::nullopt;
    }
}

TaskSample make_sample(const RobotInstance& robot, const Goal& goal, Trajectory tau,
                       const CanonicalSet& canonical)
{
    TaskSample s;
    s.goal = goal;
    s.canonical_index = match_consistent(robot, tau, canonical.entries);
    s.tau = std::move(tau);
    return s;
}

} // namespace

GoalSampler::GoalSampler(RobotInstance reference, double spread)
    : reference_(std::move(reference)), spread_(spread)
{}

Goal GoalSampler::sample(Rng& rng) const
{
    JointVector q = reference_.home();
    for (std::size_t k = 0; k < kJoints; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const JointLimit lim = reference_.chain.limits[k];
        q[i] = std::clamp(q[i] + rng.uniform(-spread_, spread_), lim.lower, lim.upper);
    }
    return Goal{forward_kinematics(reference_, q)};
}

CanonicalSet build_canonical_set(const RobotInstance& canonical, std::uint64_t master_seed,
                                 const DatasetConfig& config)
{
    if (config.pool_size < config.goals_per_robot) {
        throw Error(ErrorKind::invalid_argument, "dataset: goal pool smaller than goals_per_robot");
    }
    const GoalSampler sampler(canonical, config.goal_spread);
    Rng rng(master_seed, "goals/pool");
    CanonicalSet set;
    set.robot = canonical;
    const std::size_t budget = 10 * config.pool_size;
    for (std::size_t attempt = 0; attempt < budget && set.entries.size() < config.pool_size; ++attempt) {
        const Goal goal = sampler.sample(rng);
        if (auto tau = try_plan(canonical, goal, config.planner)) {
            const Eigen::Vector3d end = end_state(canonical, *tau);
            set.entries.push_back(CanonicalEntry{goal, std::move(*tau), end});
        }
    }
    if (set.entries.size() < config.pool_size) {
        throw UnreachableGoalError("dataset: canonical robot reached only "
                                   + std::to_string(set.entries.size()) + " of "
                                   + std::to_string(config.pool_size) + " pool goals");
    }
    return set;
}

namespace {

// Fills the support set from the pool in order; marks used entries.
void fill_support(MetaTaskDataset& task, const CanonicalSet& canonical, const DatasetConfig& config,
                  std::vector<char>& used)
{
    const std::size_t pool = canonical.entries.size();
    for (std::size_t i = 0; i < pool && task.support.size() < config.support_size; ++i) {
        const Goal& goal = canonical.entries[i].goal;
        if (auto tau = try_plan(task.robot, goal, config.planner)) {
            task.support.push_back(make_sample(task.robot, goal, std::move(*tau), canonical));
            used[i] = 1;
        }
    }
}

} // namespace

MetaTaskDataset plan_support(const RobotInstance& robot, const CanonicalSet& canonical,
                             const DatasetConfig& config)
{
    MetaTaskDataset task;
    task.robot = robot;
    std::vector<char> used(canonical.entries.size(), 0);
    fill_support(task, canonical, config, used);
    if (task.support.size() < config.support_size) {
        throw UnreachableGoalError("dataset: " + robot.name() + " reached only "
                                   + std::to_string(task.support.size()) + " of "
                                   + std::to_string(config.support_size) + " support goals");
    }
    return task;
}

MetaTaskDataset plan_task(const RobotInstance& robot, const CanonicalSet& canonical,
                          std::uint64_t master_seed, const DatasetConfig& config)
{
    const std::size_t pool = canonical.entries.size();
    if (config.support_size >= config.goals_per_robot) {
        throw Error(ErrorKind::invalid_argument, "dataset: support size must be below goals_per_robot");
    }
    MetaTaskDataset task;
    task.robot = robot;
    std::vector<char> used(pool, 0);
    fill_support(task, canonical, config, used);

    std::vector<std::size_t> order(pool);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(master_seed, "goals/query/" + robot.name() + "/" + std::to_string(robot.seed));
    for (std::size_t i = pool; i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    const std::size_t wanted = config.goals_per_robot - config.support_size;
    for (const std::size_t i : order) {
        if (task.query.size() >= wanted) {
            break;
        }
        if (used[i] != 0) {
            continue;
        }
        const Goal& goal = canonical.entries[i].goal;
        if (auto tau = try_plan(robot, goal, config.planner)) {
            task.query.push_back(make_sample(robot, goal, std::move(*tau), canonical));
            used[i] = 1;
        }
    }
    if (task.support.size() < config.support_size || task.query.size() < wanted) {
        throw UnreachableGoalError("dataset: " + robot.name() + " reached too few pool goals ("
                                   + std::to_string(task.support.size() + task.query.size())
                                   + " of " + std::to_string(config.goals_per_robot) + ")");
    }
    return task;
}

void attach_alphas(MetaTaskDataset& task, const CanonicalSet& canonical, const AlphaEncoder& encoder)
{
    for (auto* samples : {&task.support, &task.query}) {
        for (TaskSample& s : *samples) {
            s.alpha = encoder(canonical.entries.at(s.canonical_index).tau);
        }
    }
}

std::vector<MetaTaskDataset> build_meta_dataset(std::span<const RobotInstance> robots,
                                                const CanonicalSet& canonical,
                                                std::uint64_t master_seed,
                                                const DatasetConfig& config,
                                                const AlphaEncoder& encoder)
{
    std::vector<MetaTaskDataset> out;
    out.reserve(robots.size());
    for (const RobotInstance& robot : robots) {
        MetaTaskDataset task = plan_task(robot, canonical, master_seed, config);
        attach_alphas(task, canonical, encoder);
        out.push_back(std::move(task));
    }
    return out;
}

std::vector<Goal> sample_eval_goals(const RobotInstance& robot, const GoalSampler& sampler,
                                    std::size_t count, std::uint64_t master_seed,
                                    const PlannerConfig& planner)
{
    Rng rng(master_seed, "goals/eval/" + robot.name() + "/" + std::to_string(robot.seed));
    std::vector<Goal> goals;
    const std::size_t budget = 50 * count;
    for (std::size_t attempt = 0; attempt < budget && goals.size() < count; ++attempt) {
        const Goal goal = sampler.sample(rng);
        if (try_plan(robot, goal, planner)) {
            goals.push_back(goal);
        }
    }
    if (goals.size() < count) {
        throw UnreachableGoalError("dataset: found only " + std::to_string(goals.size())
                                   + " reachable evaluation goals for " + robot.name());
    }
    return goals;
}

} // namespace hyperadapt::robotsim

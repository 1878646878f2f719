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
#include "robotsim/planner.hpp"
#include "common/rng.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hyperadapt::robotsim {

struct DatasetConfig {
    std::size_t goals_per_robot = 50;
    std::size_t support_size = 5;
    // Goals shared by the canonical robot and every task.
    std::size_t pool_size = 400;
    // Half-width (rad) of the joint box around the canonical home posture
    // whose forward kinematics defines the goal distribution.
    double goal_spread = 0.35;
    PlannerConfig planner;
};

// Goals are forward kinematics of joint configurations sampled uniformly in
// a box around the reference robot's home posture, so every goal is
// reachable by the reference robot by construction.
class GoalSampler {
public:
    GoalSampler(RobotInstance reference, double spread);
    Goal sample(Rng& rng) const;

private:
    RobotInstance reference_;
    double spread_;
};

// Trajectories of the canonical robot for the shared goal pool. The first
// entries double as the demonstration goals of every task.
struct CanonicalSet {
    RobotInstance robot;
    std::vector<CanonicalEntry> entries;
};

struct TaskSample {
    Goal goal;
    Trajectory tau;
    std::size_t canonical_index = 0;
    // Action latent from the canonical encoder; empty until attached.
    std::vector<double> alpha;
};

struct MetaTaskDataset {
    RobotInstance robot;
    std::vector<TaskSample> support;
    std::vector<TaskSample> query;
};

CanonicalSet build_canonical_set(const RobotInstance& canonical, std::uint64_t master_seed,
                                 const DatasetConfig& config);

// Plans the support and query trajectories of one robot. Support goals are
// the first `support_size` pool goals the robot can reach (in pool order);
// query goals are drawn from a seeded permutation of the rest, skipping
// unreachable ones. Trajectories are matched to the canonical set by end
// state. Throws UnreachableGoalError when the pool runs out.
MetaTaskDataset plan_task(const RobotInstance& robot, const CanonicalSet& canonical,
                          std::uint64_t master_seed, const DatasetConfig& config);

// The support set alone, as demonstrated on a novel robot at meta-test.
MetaTaskDataset plan_support(const RobotInstance& robot, const CanonicalSet& canonical,
                             const DatasetConfig& config);

using AlphaEncoder = std::function<std::vector<double>(const Trajectory&)>;

// alpha of every sample = encoder(canonical trajectory it was matched to).
void attach_alphas(MetaTaskDataset& task, const CanonicalSet& canonical, const AlphaEncoder& encoder);

std::vector<MetaTaskDataset> build_meta_dataset(std::span<const RobotInstance> robots,
                                                const CanonicalSet& canonical,
                                                std::uint64_t master_seed,
                                                const DatasetConfig& config,
                                                const AlphaEncoder& encoder);

// `count` goals the robot can reach, from the stream "goals/eval/<name>".
std::vector<Goal> sample_eval_goals(const RobotInstance& robot, const GoalSampler& sampler,
                                    std::size_t count, std::uint64_t master_seed,
                                    const PlannerConfig& planner);

} // namespace hyperadapt::robotsim

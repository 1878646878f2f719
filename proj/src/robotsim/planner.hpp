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

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <span>

namespace hyperadapt::robotsim {

struct Goal {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

using TrajectoryMatrix = Eigen::Matrix<double, static_cast<int>(kJoints), static_cast<int>(kSteps)>;

// Joint position commands, one column per time step.
struct Trajectory {
    TrajectoryMatrix commands = TrajectoryMatrix::Zero();
    int robot_index = -1;

    // Motor-major flattening: element (m, t) lands at m * 14 + t.
    [[nodiscard]] std::array<double, kTrajectorySize> flat() const;
    static Trajectory from_flat(std::span<const double> values, int robot_index);
    [[nodiscard]] JointVector final_command() const { return commands.col(kSteps - 1); }
};

struct PlannerConfig {
    double damping = 0.1;
    double tolerance = 1e-3;
    int max_iterations = 500;
    double jacobian_step = 1e-6;
    // Task-space error is capped at this norm per iteration.
    double max_task_step = 0.1;
    // 3: full position goals; 2: only (x, y) is constrained and scored.
    std::size_t goal_dim = 3;
};

// Damped-least-squares IK from the home posture with a central-difference
// Jacobian. Throws UnreachableGoalError when the residual stays above the
// tolerance after max_iterations.
JointVector solve_ik(const RobotInstance& robot, const Goal& goal, const PlannerConfig& config);

// Minimum-jerk interpolation over 14 steps; column 0 is `from`, column 13 is
// exactly `to`.
Trajectory min_jerk(const JointVector& from, const JointVector& to, int robot_index);

Trajectory plan_trajectory(const RobotInstance& robot, const Goal& goal, const PlannerConfig& config);

// Executes the last command under perfect position control.
Eigen::Vector3d end_state(const RobotInstance& robot, const Trajectory& tau);

// Distance between the end state and the goal over the first goal_dim axes.
double reaching_error(const RobotInstance& robot, const Trajectory& tau, const Goal& goal,
                      std::size_t goal_dim = 3);

// Saturates every command at the robot's joint limits.
Trajectory clamp_to_limits(const RobotInstance& robot, const Trajectory& tau);

struct CanonicalEntry {
    Goal goal;
    Trajectory tau;
    Eigen::Vector3d end_state = Eigen::Vector3d::Zero();
};

// Index of the canonical entry whose end state is closest to `end`; ties go
// to the lowest index. Throws on an empty set.
std::size_t match_consistent(const Eigen::Vector3d& end, std::span<const CanonicalEntry> canonical);
std::size_t match_consistent(const RobotInstance& robot, const Trajectory& tau,
                             std::span<const CanonicalEntry> canonical);

} // namespace hyperadapt::robotsim

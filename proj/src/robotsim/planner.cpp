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

#include "robotsim/planner.hpp"

#include "common/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hyperadapt::robotsim {

namespace {

Eigen::VectorXd task_error(const Eigen::Vector3d& goal, const Eigen::Vector3d& p, std::size_t dim)
{
    return (goal - p).head(static_cast<Eigen::Index>(dim));
}

Eigen::MatrixXd jacobian(const KinematicChain& chain, JointVector q, std::size_t dim, double h)
{
    Eigen::MatrixXd j(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(kJoints));
    for (std::size_t k = 0; k < kJoints; ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        const double saved = q[col];
        q[col] = saved + h;
        const Eigen::Vector3d plus = chain.end_position({q.data(), kJoints});
        q[col] = saved - h;
        const Eigen::Vector3d minus = chain.end_position({q.data(), kJoints});
        q[col] = saved;
        j.col(col) = ((plus - minus) / (2.0 * h)).head(static_cast<Eigen::Index>(dim));
    }
    return j;
}

double min_jerk_profile(double x)
{
    const double x3 = x * x * x;
    return x3 * (10.0 - 15.0 * x + 6.0 * x * x);
}

} // namespace

std::array<double, kTrajectorySize> Trajectory::flat() const
{
    std::array<double, kTrajectorySize> out{};
    for (std::size_t m = 0; m < kJoints; ++m) {
        for (std::size_t t = 0; t < kSteps; ++t) {
            out[m * kSteps + t] = commands(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(t));
        }
    }
    return out;
}

Trajectory Trajectory::from_flat(std::span<const double> values, int robot_index)
{
    if (values.size() != kTrajectorySize) {
        throw Error(ErrorKind::shape, "trajectory: expected 98 values, got " + std::to_string(values.size()));
    }
    Trajectory tau;
    tau.robot_index = robot_index;
    for (std::size_t m = 0; m < kJoints; ++m) {
        for (std::size_t t = 0; t < kSteps; ++t) {
            tau.commands(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(t)) = values[m * kSteps + t];
        }
    }
    return tau;
}

JointVector solve_ik(const RobotInstance& robot, const Goal& goal, const PlannerConfig& config)
{
    const KinematicChain& chain = robot.chain;
    const std::size_t dim = config.goal_dim;
    if (dim != 2 && dim != 3) {
        throw Error(ErrorKind::invalid_argument, "planner: goal dimension must be 2 or 3");
    }
    const auto d = static_cast<Eigen::Index>(dim);
    const Eigen::MatrixXd damping =
        config.damping * config.damping * Eigen::MatrixXd::Identity(d, d);

    JointVector q = robot.home();
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= config.max_iterations; ++it) {
        Eigen::VectorXd e = task_error(goal.position, chain.end_position({q.data(), kJoints}), dim);
        residual = e.norm();
        if (residual <= config.tolerance) {
            return q;
        }
        if (it == config.max_iterations) {
            break;
        }
        if (residual > config.max_task_step) {
            e *= config.max_task_step / residual;
        }
        const Eigen::MatrixXd j = jacobian(chain, q, dim, config.jacobian_step);
        const Eigen::VectorXd step = j.transpose() * (j * j.transpose() + damping).ldlt().solve(e);
        for (std::size_t k = 0; k < kJoints; ++k) {
            const auto i = static_cast<Eigen::Index>(k);
            q[i] = std::clamp(q[i] + step[i], chain.limits[k].lower, chain.limits[k].upper);
        }
    }
    throw UnreachableGoalError("planner: IK for " + robot.name() + " did not converge in "
                               + std::to_string(config.max_iterations)
                               + " iterations (residual " + std::to_string(residual) + " m)");
}

Trajectory min_jerk(const JointVector& from, const JointVector& to, int robot_index)
{
    Trajectory tau;
    tau.robot_index = robot_index;
    const JointVector delta = to - from;
    tau.commands.col(0) = from;
    for (std::size_t t = 1; t + 1 < kSteps; ++t) {
        const double s = min_jerk_profile(static_cast<double>(t) / static_cast<double>(kSteps - 1));
        tau.commands.col(static_cast<Eigen::Index>(t)) = from + s * delta;
    }
    tau.commands.col(kSteps - 1) = to;
    return tau;
}

Trajectory plan_trajectory(const RobotInstance& robot, const Goal& goal, const PlannerConfig& config)
{
    return min_jerk(robot.home(), solve_ik(robot, goal, config), robot.index);
}

Eigen::Vector3d end_state(const RobotInstance& robot, const Trajectory& tau)
{
    return forward_kinematics(robot, tau.final_command());
}

double reaching_error(const RobotInstance& robot, const Trajectory& tau, const Goal& goal,
                      std::size_t goal_dim)
{
    return task_error(goal.position, end_state(robot, tau), goal_dim).norm();
}

Trajectory clamp_to_limits(const RobotInstance& robot, const Trajectory& tau)
{
    Trajectory out = tau;
    for (std::size_t m = 0; m < kJoints; ++m) {
        const JointLimit lim = robot.chain.limits[m];
        for (std::size_t t = 0; t < kSteps; ++t) {
            double& v = out.commands(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(t));
            v = std::clamp(v, lim.lower, lim.upper);
        }
    }
    return out;
}

std::size_t match_consistent(const Eigen::Vector3d& end, std::span<const CanonicalEntry> canonical)
{
    if (canonical.empty()) {
        throw Error(ErrorKind::invalid_argument, "match_consistent: canonical set is empty");
    }
    std::size_t best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < canonical.size(); ++i) {
        const double distance = (canonical[i].end_state - end).norm();
        if (distance < best_distance) {
            best_distance = distance;
            best = i;
        }
    }
    return best;
}

std::size_t match_consistent(const RobotInstance& robot, const Trajectory& tau,
                             std::span<const CanonicalEntry> canonical)
{
    return match_consistent(end_state(robot, tau), canonical);
}

} // namespace hyperadapt::robotsim

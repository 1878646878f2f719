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

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hyperadapt::robotsim {

inline constexpr std::size_t kJoints = 7;
inline constexpr std::size_t kSteps = 14;
inline constexpr std::size_t kTrajectorySize = kJoints * kSteps;

using JointVector = Eigen::Matrix<double, kJoints, 1>;

enum class Platform { yumi, kinova, franka, baxter };

inline constexpr std::array<Platform, 4> kPlatforms{Platform::yumi, Platform::kinova,
                                                    Platform::franka, Platform::baxter};

std::string_view platform_name(Platform p);
Platform parse_platform(std::string_view name);
std::size_t platform_index(Platform p);

struct JointLimit {
    double lower = 0.0;
    double upper = 0.0;

    [[nodiscard]] double mid() const noexcept { return 0.5 * (lower + upper); }
    [[nodiscard]] bool contains(double q) const noexcept { return q >= lower && q <= upper; }
};

struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

// Serial chain of revolute joints. Joint k rotates about axes[k] (in the
// frame of the preceding link) and is followed by a link of length
// lengths[k] along the local x axis.
struct KinematicChain {
    std::vector<double> lengths;
    std::vector<Eigen::Vector3d> axes;
    RigidTransform base;
    std::vector<JointLimit> limits;

    [[nodiscard]] std::size_t dof() const noexcept { return lengths.size(); }

    // End position without limit checks.
    [[nodiscard]] Eigen::Vector3d end_position(std::span<const double> q) const;
    [[nodiscard]] bool within_limits(std::span<const double> q) const;
    // Throws Error(invalid_argument) on non-positive lengths, non-unit axes
    // or degenerate limits.
    void validate() const;
};

struct PlatformTemplate {
    Platform id = Platform::yumi;
    std::array<double, kJoints> link_lengths{};
    std::array<Eigen::Vector3d, kJoints> axes{};
    RigidTransform base;
    std::array<JointLimit, kJoints> limits{};
};

const PlatformTemplate& platform_template(Platform p);

inline constexpr double kMinScale = 0.7;
inline constexpr double kMaxScale = 1.3;

struct RobotInstance {
    Platform platform = Platform::yumi;
    int index = 0;
    std::uint64_t seed = 0;
    std::array<double, kJoints> scale{};
    KinematicChain chain;

    // Mid-range of the joint limits.
    [[nodiscard]] JointVector home() const;
    [[nodiscard]] std::string name() const;
};

// Per-link scale factors uniform in [0.7, 1.3], deterministic in the seed.
RobotInstance sample_robot(const PlatformTemplate& tmpl, std::uint64_t seed, int index);
// Template lengths unscaled.
RobotInstance nominal_robot(const PlatformTemplate& tmpl, int index);
// Rebuilds an instance from recorded scale factors.
RobotInstance robot_from_scales(const PlatformTemplate& tmpl, const std::array<double, kJoints>& scale,
                                std::uint64_t seed, int index);

// End-effector position; throws Error(invalid_argument) when q leaves the
// joint limits.
Eigen::Vector3d forward_kinematics(const RobotInstance& robot, const JointVector& q);

} // namespace hyperadapt::robotsim

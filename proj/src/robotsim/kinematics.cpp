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

#include "robotsim/kinematics.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace hyperadapt::robotsim {

namespace {

const Eigen::Vector3d kX = Eigen::Vector3d::UnitX();
const Eigen::Vector3d kY = Eigen::Vector3d::UnitY();
const Eigen::Vector3d kZ = Eigen::Vector3d::UnitZ();

std::array<JointLimit, kJoints> limits_around(const std::array<double, kJoints>& home,
                                              const std::array<double, kJoints>& half_range)
{
    std::array<JointLimit, kJoints> out{};
    for (std::size_t k = 0; k < kJoints; ++k) {
        out[k] = {home[k] - half_range[k], home[k] + half_range[k]};
    }
    return out;
}

// Every family's nominal home posture puts the end effector here.
const Eigen::Vector3d kWorkspaceCentre(0.45, 0.0, 0.25);

// Places the base so the nominal home end position lands on the common
// workspace centre.
void centre_base(PlatformTemplate& tmpl)
{
    KinematicChain chain;
    std::vector<double> home;
    for (std::size_t k = 0; k < kJoints; ++k) {
        chain.lengths.push_back(tmpl.link_lengths[k]);
        chain.axes.push_back(tmpl.axes[k]);
        chain.limits.push_back(tmpl.limits[k]);
        home.push_back(tmpl.limits[k].mid());
    }
    tmpl.base.translation = kWorkspaceCentre - chain.end_position(home);
}

// Four kinematic families with distinct link-length profiles, joint-axis
// patterns and home postures. Limits are centred on the home posture.
std::array<PlatformTemplate, 4> make_templates()
{
    std::array<PlatformTemplate, 4> t{};

    t[0].id = Platform::yumi;
    t[0].link_lengths = {0.10, 0.30, 0.05, 0.25, 0.05, 0.15, 0.10};
    t[0].axes = {kZ, kY, kX, kY, kX, kY, kX};
    t[0].limits = limits_around({0.0, -0.9, 0.0, 1.8, 0.0, 0.6, 0.0},
                                {2.0, 1.6, 2.0, 1.6, 2.0, 1.6, 2.0});

    t[1].id = Platform::kinova;
    t[1].link_lengths = {0.15, 0.25, 0.05, 0.25, 0.05, 0.15, 0.10};
    t[1].axes = {kZ, kY, kZ, kY, kZ, kY, kZ};
    t[1].limits = limits_around({0.3, -0.9, 0.2, 1.9, -0.2, 0.6, 0.0},
                                {2.0, 1.6, 2.0, 1.6, 2.0, 1.6, 2.0});

    t[2].id = Platform::franka;
    t[2].link_lengths = {0.20, 0.05, 0.30, 0.05, 0.30, 0.05, 0.05};
    t[2].axes = {kZ, kY, kZ, Eigen::Vector3d(-kY), kZ, Eigen::Vector3d(-kY), kX};
    t[2].limits = limits_around({-0.2, -0.6, 0.0, -1.8, 0.1, -0.5, 0.0},
                                {2.0, 1.6, 2.0, 1.6, 2.0, 1.6, 2.0});

    t[3].id = Platform::baxter;
    t[3].link_lengths = {0.25, 0.10, 0.30, 0.05, 0.25, 0.05, 0.05};
    t[3].axes = {kZ, kY, kX, kY, kX, kY, kX};
    t[3].limits = limits_around({0.2, -1.0, 0.3, 2.0, 0.0, 0.4, 0.0},
                                {2.0, 1.6, 2.0, 1.6, 2.0, 1.6, 2.0});

    for (PlatformTemplate& tmpl : t) {
        centre_base(tmpl);
    }
    return t;
}

} // namespace

std::string_view platform_name(Platform p)
{
    switch (p) {
    case Platform::yumi: return "yumi";
    case Platform::kinova: return "kinova";
    case Platform::franka: return "franka";
    case Platform::baxter: return "baxter";
    }
    return "unknown";
}

Platform parse_platform(std::string_view name)
{
    for (const Platform p : kPlatforms) {
        if (platform_name(p) == name) {
            return p;
        }
    }
    throw Error(ErrorKind::invalid_argument, "unknown platform '" + std::string(name)
                                                 + "' (expected yumi, kinova, franka or baxter)");
}

std::size_t platform_index(Platform p)
{
    return static_cast<std::size_t>(p);
}

Eigen::Vector3d KinematicChain::end_position(std::span<const double> q) const
{
    Eigen::Matrix3d rotation = base.rotation;
    Eigen::Vector3d position = base.translation;
    for (std::size_t k = 0; k < lengths.size(); ++k) {
        rotation = rotation * Eigen::AngleAxisd(q[k], axes[k]).toRotationMatrix();
        position += rotation.col(0) * lengths[k];
    }
    return position;
}

bool KinematicChain::within_limits(std::span<const double> q) const
{
    if (q.size() != limits.size()) {
        return false;
    }
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (!limits[k].contains(q[k])) {
            return false;
        }
    }
    return true;
}

void KinematicChain::validate() const
{
    if (axes.size() != lengths.size() || limits.size() != lengths.size()) {
        throw Error(ErrorKind::invalid_argument, "chain: lengths, axes and limits differ in size");
    }
    for (std::size_t k = 0; k < lengths.size(); ++k) {
        if (!(lengths[k] > 0.0)) {
            throw Error(ErrorKind::invalid_argument, "chain: link " + std::to_string(k) + " has non-positive length");
        }
        if (std::abs(axes[k].norm() - 1.0) > 1e-12) {
            throw Error(ErrorKind::invalid_argument, "chain: axis " + std::to_string(k) + " is not unit-norm");
        }
        if (!(limits[k].upper > limits[k].lower)) {
            throw Error(ErrorKind::invalid_argument, "chain: joint " + std::to_string(k) + " has degenerate limits");
        }
    }
}

const PlatformTemplate& platform_template(Platform p)
{
    static const std::array<PlatformTemplate, 4> templates = make_templates();
    return templates.at(platform_index(p));
}

JointVector RobotInstance::home() const
{
    JointVector q;
    for (std::size_t k = 0; k < kJoints; ++k) {
        q[static_cast<Eigen::Index>(k)] = chain.limits[k].mid();
    }
    return q;
}

std::string RobotInstance::name() const
{
    return std::string(platform_name(platform)) + "-" + std::to_string(index);
}

RobotInstance robot_from_scales(const PlatformTemplate& tmpl, const std::array<double, kJoints>& scale,
                                std::uint64_t seed, int index)
{
    RobotInstance robot;
    robot.platform = tmpl.id;
    robot.index = index;
    robot.seed = seed;
    robot.scale = scale;
    robot.chain.base = tmpl.base;
    for (std::size_t k = 0; k < kJoints; ++k) {
        if (scale[k] < kMinScale || scale[k] > kMaxScale) {
            throw Error(ErrorKind::invalid_argument, "robot: scale factor outside [0.7, 1.3]");
        }
        robot.chain.lengths.push_back(tmpl.link_lengths[k] * scale[k]);
        robot.chain.axes.push_back(tmpl.axes[k]);
        robot.chain.limits.push_back(tmpl.limits[k]);
    }
    robot.chain.validate();
    return robot;
}

RobotInstance sample_robot(const PlatformTemplate& tmpl, std::uint64_t seed, int index)
{
    Rng rng(seed);
    std::array<double, kJoints> scale{};
    for (double& s : scale) {
        s = rng.uniform(kMinScale, kMaxScale);
    }
    return robot_from_scales(tmpl, scale, seed, index);
}

RobotInstance nominal_robot(const PlatformTemplate& tmpl, int index)
{
    std::array<double, kJoints> ones{};
    ones.fill(1.0);
    return robot_from_scales(tmpl, ones, 0, index);
}

Eigen::Vector3d forward_kinematics(const RobotInstance& robot, const JointVector& q)
{
    const std::span<const double> angles(q.data(), kJoints);
    if (!robot.chain.within_limits(angles)) {
        throw Error(ErrorKind::invalid_argument,
                    "forward_kinematics: joint angles outside the limits of " + robot.name());
    }
    return robot.chain.end_position(angles);
}

} // namespace hyperadapt::robotsim

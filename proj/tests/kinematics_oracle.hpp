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

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace hyperadapt::testing {

// Independent planar oracle: a chain of z-axis joints with links along x.
inline Eigen::Vector3d planar_oracle(std::span<const double> lengths, std::span<const double> angles,
                                     const Eigen::Vector3d& base)
{
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
    for (std::size_t k = 0; k < lengths.size(); ++k) {
        heading += angles[k];
        x += lengths[k] * std::cos(heading);
        y += lengths[k] * std::sin(heading);
    }
    return base + Eigen::Vector3d(x, y, 0.0);
}

inline robotsim::KinematicChain planar_chain(std::vector<double> lengths, const Eigen::Vector3d& base)
{
    robotsim::KinematicChain chain;
    chain.lengths = std::move(lengths);
    for (std::size_t k = 0; k < chain.lengths.size(); ++k) {
        chain.axes.push_back(Eigen::Vector3d::UnitZ());
        chain.limits.push_back({-std::numbers::pi, std::numbers::pi});
    }
    chain.base.translation = base;
    chain.validate();
    return chain;
}

} // namespace hyperadapt::testing

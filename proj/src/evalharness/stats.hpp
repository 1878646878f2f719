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

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace hyperadapt::evalharness {

struct Aggregate {
    // Mean over goals of each policy.
    std::vector<double> policy_means;
    double mean = 0.0;
    // 95% t-interval half-width over the policy means; absent for one policy.
    std::optional<double> ci_half_width;
};

// errors[j][g]: error of policy j on goal g.
Aggregate aggregate(std::span<const std::vector<double>> errors);

// Two-sided 95% Student-t interval half-width of a sample (n >= 2).
double t_interval_half_width(std::span<const double> values);

} // namespace hyperadapt::evalharness

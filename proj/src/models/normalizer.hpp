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

#include "robotsim/planner.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hyperadapt::models {

// Per-feature standardization x -> (x - mean) / stddev.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Normalizer identity(std::size_t n);
    // Joint-wise statistics over all time steps, expanded to the flat
    // motor-major trajectory layout.
    static Normalizer fit_trajectories(std::span<const robotsim::Trajectory> data);
    static Normalizer fit_rows(std::span<const std::vector<double>> rows);

    [[nodiscard]] std::size_t size() const noexcept { return mean.size(); }
    [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;
    [[nodiscard]] std::vector<double> invert(std::span<const double> y) const;

    bool operator==(const Normalizer&) const = default;
};

} // namespace hyperadapt::models

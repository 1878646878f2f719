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

#include "models/normalizer.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <cmath>

namespace hyperadapt::models {

namespace {

// Features with (almost) no spread are only centred.
constexpr double kMinStddev = 1e-6;

double safe_stddev(double variance)
{
    const double s = std::sqrt(std::max(variance, 0.0));
    return s < kMinStddev ? 1.0 : s;
}

} // namespace

Normalizer Normalizer::identity(std::size_t n)
{
    return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
}

Normalizer Normalizer::fit_trajectories(std::span<const robotsim::Trajectory> data)
{
    using robotsim::kJoints;
    using robotsim::kSteps;
    if (data.empty()) {
        throw Error(ErrorKind::invalid_argument, "normalizer: no trajectories");
    }
    Normalizer out;
    out.mean.resize(robotsim::kTrajectorySize);
    out.stddev.resize(robotsim::kTrajectorySize);
    const double n = static_cast<double>(data.size() * kSteps);
    for (std::size_t m = 0; m < kJoints; ++m) {
        const auto row = static_cast<Eigen::Index>(m);
        double total = 0.0;
        for (const auto& tau : data) {
            total += tau.commands.row(row).sum();
        }
        const double mean = total / n;
        double sq = 0.0;
        for (const auto& tau : data) {
            sq += (tau.commands.row(row).array() - mean).square().sum();
        }
        const double sd = safe_stddev(sq / n);
        for (std::size_t t = 0; t < kSteps; ++t) {
            out.mean[m * kSteps + t] = mean;
            out.stddev[m * kSteps + t] = sd;
        }
    }
    return out;
}

Normalizer Normalizer::fit_rows(std::span<const std::vector<double>> rows)
{
    if (rows.empty()) {
        throw Error(ErrorKind::invalid_argument, "normalizer: no rows");
    }
    const std::size_t d = rows.front().size();
    Normalizer out{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (const auto& r : rows) {
        if (r.size() != d) {
            throw ShapeError("normalizer: ragged rows");
        }
        for (std::size_t i = 0; i < d; ++i) {
            out.mean[i] += r[i];
        }
    }
    const double n = static_cast<double>(rows.size());
    for (double& m : out.mean) {
        m /= n;
    }
    std::vector<double> sq(d, 0.0);
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < d; ++i) {
            sq[i] += (r[i] - out.mean[i]) * (r[i] - out.mean[i]);
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        out.stddev[i] = safe_stddev(sq[i] / n);
    }
    return out;
}

std::vector<double> Normalizer::apply(std::span<const double> x) const
{
    if (x.size() != size()) {
        throw ShapeError("normalizer: expected " + std::to_string(size()) + " features, got "
                         + std::to_string(x.size()));
    }
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = (x[i] - mean[i]) / stddev[i];
    }
    return out;
}

std::vector<double> Normalizer::invert(std::span<const double> y) const
{
    if (y.size() != size()) {
        throw ShapeError("normalizer: expected " + std::to_string(size()) + " features, got "
                         + std::to_string(y.size()));
    }
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        out[i] = y[i] * stddev[i] + mean[i];
    }
    return out;
}

} // namespace hyperadapt::models

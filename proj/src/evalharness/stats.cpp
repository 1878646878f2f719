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

#include "evalharness/stats.hpp"

#include "common/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <numeric>

namespace hyperadapt::evalharness {

namespace {

double mean_of(std::span<const double> v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

double t_interval_half_width(std::span<const double> values)
{
    const std::size_t n = values.size();
    if (n < 2) {
        throw Error(ErrorKind::invalid_argument, "aggregate: a t-interval needs at least two values");
    }
    const double m = mean_of(values);
    double ss = 0.0;
    for (const double v : values) {
        ss += (v - m) * (v - m);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const boost::math::students_t dist(static_cast<double>(n - 1));
    return boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(n));
}

Aggregate aggregate(std::span<const std::vector<double>> errors)
{
    if (errors.empty()) {
        throw Error(ErrorKind::invalid_argument, "aggregate: no policies");
    }
    Aggregate a;
    for (const auto& row : errors) {
        if (row.empty()) {
            throw Error(ErrorKind::invalid_argument, "aggregate: a policy has no evaluated goals");
        }
        a.policy_means.push_back(mean_of(row));
    }
    a.mean = mean_of(a.policy_means);
    if (a.policy_means.size() > 1) {
        a.ci_half_width = t_interval_half_width(a.policy_means);
    }
    return a;
}

} // namespace hyperadapt::evalharness

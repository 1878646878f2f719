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

#include "ad/tape.hpp"

#include <cstddef>
#include <vector>

namespace hyperadapt::models {

inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

struct DiagonalGaussian {
    std::vector<double> mean;
    std::vector<double> logvar;

    [[nodiscard]] std::size_t dim() const noexcept { return mean.size(); }
};

// KL(q || p) in closed form.
double kl_divergence(const DiagonalGaussian& q, const DiagonalGaussian& p);
double kl_standard_normal(const DiagonalGaussian& q);

// Rows of a tape-resident Gaussian (n x d mean and log-variance).
struct GaussianVar {
    ad::Var mean;
    ad::Var logvar;
};

// Splits an (n x 2d) head into mean and log-variance. The log-variance is
// squashed as kLogVarMax * tanh(raw / kLogVarMax), which keeps it inside
// (kLogVarMin, kLogVarMax) without a zero-gradient region: with a hard clamp
// a task whose raw head saturates can never recover.
GaussianVar split_gaussian_head(const ad::Var& head);

// Row i of a GaussianVar as plain numbers.
DiagonalGaussian row_gaussian(const GaussianVar& g, std::size_t row);

// Sum over rows and dimensions of KL(q_row || N(0, I)).
ad::Var kl_standard_normal(const GaussianVar& q);

// mean + exp(logvar / 2) * eps with eps drawn from `normal()` row-major.
template <typename Normal>
ad::Var sample(const GaussianVar& q, Normal&& normal);

// Negative log-likelihood of `target` rows under N(prediction, I), summed
// over columns and averaged over rows.
ad::Var unit_gaussian_nll(const ad::Var& prediction, const ad::Var& target);

// Negative log-likelihood of `target` rows under N(q.mean, exp(q.logvar)),
// summed over columns and averaged over rows.
ad::Var gaussian_nll(const GaussianVar& q, const ad::Var& target);

} // namespace hyperadapt::models

#include "ad/ops.hpp"

namespace hyperadapt::models {

template <typename Normal>
ad::Var sample(const GaussianVar& q, Normal&& normal)
{
    ad::DenseArray eps(q.mean.shape());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        eps[i] = normal();
    }
    return ad::reparameterize(q.mean, q.logvar, q.mean.tape().constant(std::move(eps)));
}

} // namespace hyperadapt::models

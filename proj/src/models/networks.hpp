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

#include "models/dense_net.hpp"
#include "models/gaussian.hpp"
#include "models/normalizer.hpp"
#include "robotsim/planner.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hyperadapt::models {

// Layer widths of every model. The defaults are the full-size models; tests
// shrink them for finite-difference checks.
struct ModelDims {
    std::size_t trajectory = robotsim::kTrajectorySize;
    std::size_t alpha = 6;
    std::size_t z = 2;
    std::size_t support = 5;
    std::size_t decoder_hidden = 8;
    std::vector<std::size_t> vae_encoder_hidden{64, 32};
    std::vector<std::size_t> subpolicy_hidden{16, 16};
    std::vector<std::size_t> task_encoder_hidden{128, 64, 32};
    std::vector<std::size_t> hypernet_hidden{32, 64, 128, 256};

    [[nodiscard]] std::vector<std::size_t> decoder_widths() const;
    [[nodiscard]] std::vector<std::size_t> versa_decoder_widths() const;
    [[nodiscard]] std::size_t decoder_size() const;

    bool operator==(const ModelDims&) const = default;
};

// Encoder 98 -> ... -> 2*alpha (mean, log-variance); decoder alpha -> hidden -> 98.
struct TrajectoryVAE {
    DenseNet encoder;
    DenseNet decoder;
    Normalizer norm;
};

// goal_dim -> ... -> 2*alpha.
struct SubPolicy {
    DenseNet net;
    Normalizer goal_norm;
    std::size_t goal_dim = 3;
};

// support*98 -> ... -> 2*z.
struct TaskEncoder {
    DenseNet net;
};

// z -> ... -> decoder parameter count.
struct HyperNetwork {
    DenseNet net;
};

TrajectoryVAE make_vae(const ModelDims& dims, Rng& rng);
SubPolicy make_subpolicy(const ModelDims& dims, std::size_t goal_dim, Rng& rng);
TaskEncoder make_task_encoder(const ModelDims& dims, Rng& rng);
HyperNetwork make_hypernetwork(const ModelDims& dims, Rng& rng, double output_gain = 1.0);

// Normalized trajectories as rows of an (n x 98) array.
ad::DenseArray trajectory_rows(std::span<const robotsim::Trajectory> data, const Normalizer& norm);
// The support set flattened in order into one (1 x support*98) row.
ad::DenseArray support_row(std::span<const robotsim::Trajectory> support, const Normalizer& norm);

// -E_q[log p(tau | alpha)] + KL(q(alpha | tau) || N(0, I)), averaged over the
// rows of `x` (normalized trajectories). `eps` has one row of noise per row.
ad::Var vae_loss(std::span<const ad::Var> encoder, std::span<const ad::Var> decoder, const ad::Var& x,
                 const ad::Var& eps);

// Mean of q(alpha | tau).
std::vector<double> encode_alpha(const TrajectoryVAE& vae, const robotsim::Trajectory& tau);
std::vector<std::vector<double>> encode_alphas(const TrajectoryVAE& vae,
                                               std::span<const robotsim::Trajectory> data);
DiagonalGaussian encode_alpha_distribution(const TrajectoryVAE& vae, const robotsim::Trajectory& tau);

// q(z | support); throws unless exactly `dims.support` trajectories are given.
DiagonalGaussian encode_task(const TaskEncoder& encoder, std::span<const robotsim::Trajectory> support,
                             const Normalizer& norm);

// Deterministic z -> decoder parameters.
std::vector<double> generate_params(const HyperNetwork& hypernet, std::span<const double> z);

// A decoder view of a flat parameter vector; throws on a length mismatch.
DenseNet bind_params(std::span<const double> params, const ModelDims& dims);
std::vector<double> unbind_params(const DenseNet& decoder);

// Decoder output (normalized space) for alpha rows.
ad::DenseArray decode_rows(const DenseNet& decoder, const ad::DenseArray& alpha);
// Denormalized trajectory for one latent input.
robotsim::Trajectory decode(const DenseNet& decoder, std::span<const double> input, const Normalizer& norm,
                            int robot_index = -1);

// Mean and log-variance of pi(alpha | goal).
DiagonalGaussian policy_distribution(const SubPolicy& policy, const robotsim::Goal& goal);
ad::DenseArray goal_rows(const SubPolicy& policy, std::span<const robotsim::Goal> goals);

// Forward pass of a whole network without recording gradients.
ad::DenseArray evaluate(const DenseNet& net, const ad::DenseArray& x);

} // namespace hyperadapt::models

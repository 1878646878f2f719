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

#include "models/networks.hpp"
#include "robotsim/planner.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hyperadapt::models {

struct FitConfig {
    std::size_t epochs = 1500;
    std::size_t batch_size = 32;
    double lr = 1e-3;
};

// Fits normalization statistics and an Adam-trained VAE to the canonical
// robot's trajectories. Mean loss per epoch goes to `epoch_loss` if given.
TrajectoryVAE train_vae(std::span<const robotsim::Trajectory> data, const ModelDims& dims,
                        const FitConfig& config, std::uint64_t seed,
                        std::vector<double>* epoch_loss = nullptr);

// Per-element RMSE (rad) of decoding the encoder mean of each trajectory.
double reconstruction_rmse(const TrajectoryVAE& vae, std::span<const robotsim::Trajectory> data);

// Regresses pi(alpha | goal) onto the canonical encoder means of the paired
// trajectories by Gaussian negative log-likelihood.
SubPolicy train_subpolicy(const TrajectoryVAE& vae, std::span<const robotsim::Goal> goals,
                          std::span<const robotsim::Trajectory> data, std::size_t goal_dim,
                          const ModelDims& dims, const FitConfig& config, std::uint64_t seed,
                          std::vector<double>* epoch_loss = nullptr);

} // namespace hyperadapt::models

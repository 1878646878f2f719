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

#include "evalharness/scenario.hpp"
#include "evalharness/stats.hpp"
#include "metalearn/meta.hpp"
#include "models/training.hpp"
#include "robotsim/dataset.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hyperadapt::evalharness {

// How the j sampled policies of a novel robot are reported.
enum class Selection {
    all,
    // Only the policy with the lowest post-adaptation support NLL.
    support_nll,
};

std::string_view selection_name(Selection s);
Selection parse_selection(std::string_view name);

struct ExperimentConfig {
    robotsim::Platform canonical_platform = robotsim::Platform::yumi;
    robotsim::DatasetConfig data;
    models::ModelDims dims;
    models::FitConfig vae_fit;
    models::FitConfig subpolicy_fit;
    metalearn::TrainConfig meta;
    std::size_t goal_dim = 3;
    std::size_t eval_goals = 30;
    Selection selection = Selection::all;
    // Goals reached within this distance count as successes.
    double success_threshold_cm = 2.0;
};

// Nominal robot of the canonical platform, index -1.
robotsim::RobotInstance canonical_robot(const ExperimentConfig& config);
robotsim::GoalSampler goal_sampler(const ExperimentConfig& config);

struct CanonicalModels {
    robotsim::CanonicalSet set;
    models::TrajectoryVAE vae;
    models::SubPolicy policy;
    std::vector<double> vae_loss;
    std::vector<double> subpolicy_loss;
};

// Plans the canonical goal pool and trains the VAE and the sub-policy on it.
CanonicalModels train_canonical(const ExperimentConfig& config, std::uint64_t seed);

// Meta-task datasets with alphas for the given robots.
std::vector<robotsim::MetaTaskDataset> build_tasks(std::span<const robotsim::RobotInstance> robots,
                                                   const CanonicalModels& canonical, const ExperimentConfig& config,
                                                   std::uint64_t seed);

std::vector<metalearn::TaskTensors> to_tensors(std::span<const robotsim::MetaTaskDataset> tasks,
                                               const models::Normalizer& norm);

// Support set (with alphas) of a novel robot.
metalearn::TaskTensors support_tensors(const robotsim::RobotInstance& robot, const CanonicalModels& canonical,
                                       const ExperimentConfig& config);

using TrajectoryDecoder = std::function<robotsim::Trajectory(std::span<const double> alpha)>;

// Reaching error (cm) per goal of alpha = sub-policy mean, tau = decoder(alpha)
// saturated at the joint limits.
std::vector<double> evaluate_policy(const models::SubPolicy& policy, const TrajectoryDecoder& decoder,
                                    const robotsim::RobotInstance& robot, std::span<const robotsim::Goal> goals);

// The canonical VAE decoder, as used for the canonical robot.
TrajectoryDecoder canonical_decoder(const models::TrajectoryVAE& vae, int robot_index);

struct ResultRecord {
    std::string scenario;
    metalearn::Method method = metalearn::Method::ours;
    robotsim::Platform platform = robotsim::Platform::yumi;
    std::string robot;
    int robot_index = 0;
    std::uint64_t seed = 0;
    // errors[j][g] in cm, one row per reported policy.
    std::vector<std::vector<double>> errors;
    Aggregate summary;
    // Fraction of (policy, goal) pairs within the success threshold.
    double success_rate = 0.0;
    std::vector<double> support_nll_before;
    std::vector<double> support_nll_after;
};

// Meta-tests `model` on one novel robot and evaluates every adapted policy.
ResultRecord evaluate_method(const metalearn::MetaModel& model, const CanonicalModels& canonical,
                             const robotsim::RobotInstance& robot, const ExperimentConfig& config,
                             std::string_view scenario, std::uint64_t seed);

struct LatentRow {
    std::string robot;
    robotsim::Platform platform = robotsim::Platform::yumi;
    double z_x = 0.0;
    double z_y = 0.0;
    // A novel robot of the excluded platform rather than a meta-training task.
    bool held_out = false;
};

std::vector<LatentRow> export_latents(const metalearn::MetaModel& model,
                                      std::span<const metalearn::TaskTensors> tasks, bool held_out = false);

// Leave-one-out 1-nearest-neighbour platform accuracy over z means.
double latent_separation_score(std::span<const LatentRow> rows);
// Mean accuracy after uniformly permuting the platform labels.
double shuffled_separation_score(std::span<const LatentRow> rows, std::size_t shuffles, std::uint64_t seed);

struct ScenarioResult {
    std::vector<ResultRecord> records;
    std::map<metalearn::Method, std::vector<metalearn::EpochMetrics>> metrics;
    std::map<metalearn::Method, metalearn::MetaModel> models;
    std::vector<LatentRow> latents; // from "ours" if it ran
};

// Generates the scenario's tasks, meta-trains each method and evaluates it on
// the novel robots. The canonical models are trained here unless given.
// Every stream derives from spec.seed (config.meta.seed is overridden).
ScenarioResult run_scenario(const ScenarioSpec& spec, std::span<const metalearn::Method> methods,
                            const ExperimentConfig& config, const CanonicalModels* canonical = nullptr);

// Mean of the robot means of one method on one platform.
std::optional<double> platform_mean(std::span<const ResultRecord> records, metalearn::Method method,
                                    robotsim::Platform platform);

} // namespace hyperadapt::evalharness

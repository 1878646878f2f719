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

#include "ad/adam.hpp"
#include "common/container.hpp"
#include "models/networks.hpp"
#include "robotsim/dataset.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hyperadapt::metalearn {

enum class Method { ours, maml, versa, avi };

inline constexpr Method kMethods[] = {Method::ours, Method::maml, Method::versa, Method::avi};

std::string_view method_name(Method m);
Method parse_method(std::string_view name);
// Methods that infer a task latent z and sample j policies at meta-test.
bool is_probabilistic(Method m);

struct TrainConfig {
    double beta = 5e-3;
    double lambda_init = 0.01;
    double lr = 1e-4;
    std::size_t epochs = 1000;
    bool second_order = true;
    std::size_t meta_batch = 16;
    // Policies sampled per novel robot at meta-test (j).
    std::size_t samples = 20;
    std::size_t inner_steps = 1;
    // Keeps lambda at its initial value.
    bool freeze_lambda = false;
    // Start every decoder from the canonical VAE decoder: the hypernetwork
    // output bias, the MAML meta-parameters and the alpha rows of the
    // conditioned decoder.
    bool warm_start = true;
    // Scale of the initial hypernetwork output weights and of the z rows of
    // the conditioned decoder.
    double output_gain = 0.1;
    std::uint64_t seed = 0;
};

// One task as network-ready arrays (normalized trajectories).
struct TaskTensors {
    std::string robot;
    robotsim::Platform platform = robotsim::Platform::yumi;
    ad::DenseArray support_alpha; // s x alpha
    ad::DenseArray support_x;     // s x 98
    ad::DenseArray support_flat;  // 1 x s*98
    ad::DenseArray query_alpha;   // q x alpha
    ad::DenseArray query_x;       // q x 98
};

TaskTensors make_task_tensors(const robotsim::MetaTaskDataset& task, const models::Normalizer& norm);
// Support set only, for novel robots at meta-test.
TaskTensors make_support_tensors(const robotsim::RobotInstance& robot,
                                 std::span<const robotsim::TaskSample> support,
                                 const models::Normalizer& norm);

// Parameters of one meta-learner. Which members are used depends on the
// method; unused networks stay empty.
struct MetaModel {
    Method method = Method::ours;
    models::ModelDims dims;
    models::Normalizer norm;
    models::TaskEncoder encoder;   // ours, versa, avi
    models::HyperNetwork hypernet; // ours, avi
    models::DenseNet decoder;      // maml meta-parameters; versa conditioned decoder
    double lambda = 0.0;           // ours, maml
    std::size_t epochs_done = 0;

    ad::AdamState encoder_state;
    ad::AdamState hypernet_state;
    ad::AdamState decoder_state;
    ad::AdamState lambda_state;
};

MetaModel init_meta_model(Method method, const models::ModelDims& dims, const models::TrajectoryVAE& canonical,
                          const TrainConfig& config);

enum class InnerMode {
    // The step is recorded so outer gradients flow through the inner
    // gradient (second-order).
    second_order,
    // Outer gradients flow through phi and lambda, the inner gradient is a
    // constant.
    first_order,
};

// theta = phi - lambda * grad_phi NLL(support) repeated `steps` times.
// `lambda` is a 1x1 node.
std::vector<ad::Var> inner_adapt(std::span<const ad::Var> phi, const ad::Var& support_alpha,
                                 const ad::Var& support_x, const ad::Var& lambda, InnerMode mode,
                                 std::size_t steps = 1);

struct TaskLoss {
    ad::Var total;
    double nll = 0.0;
    double kl = 0.0;
};

// Attached parameter nodes of a MetaModel on one tape.
struct AttachedModel {
    std::vector<ad::Var> encoder;
    std::vector<ad::Var> hypernet;
    std::vector<ad::Var> decoder;
    ad::Var lambda;

    [[nodiscard]] std::vector<ad::Var> all() const;
};

AttachedModel attach(const MetaModel& model, ad::Tape& tape);

// The outer objective of one task: query NLL after adaptation plus
// beta * KL(q(z | support) || N(0, I)). `normal` supplies reparameterization
// noise.
TaskLoss task_loss(const MetaModel& model, const AttachedModel& params, const TaskTensors& task,
                   const TrainConfig& config, const std::function<double()>& normal);

struct EpochMetrics {
    std::size_t epoch = 0;
    double total = 0.0;
    double nll = 0.0;
    double kl = 0.0;
    double lambda = 0.0;
};

// Called after every epoch; used for logging and checkpointing.
using EpochCallback = std::function<void(const EpochMetrics&, const MetaModel&)>;

// Meta-trains until `model.epochs_done == config.epochs`, continuing from
// the model's optimizer state. Shuffling and noise streams are keyed by epoch
// so a reloaded checkpoint resumes exactly. Returns the metrics (means over
// tasks) of the epochs run.
std::vector<EpochMetrics> meta_train(MetaModel& model, std::span<const TaskTensors> tasks,
                                     const TrainConfig& config, const EpochCallback& callback = {});

// Loss of the first meta-batch of the next epoch without updating anything;
// used to check that resumed training continues identically.
double next_step_loss(const MetaModel& model, std::span<const TaskTensors> tasks, const TrainConfig& config);

struct AdaptedModel {
    // Adapted decoder parameters (alpha -> trajectory), or the shared
    // conditioned decoder for the z-conditioned method.
    std::vector<double> theta;
    std::vector<double> z;
    double support_nll_before = 0.0;
    double support_nll_after = 0.0;
};

// j adapted decoders for one novel robot (one for deterministic methods).
std::vector<AdaptedModel> meta_test(const MetaModel& model, const TaskTensors& support, const TrainConfig& config,
                                    std::uint64_t stream_seed);

// Trajectory for one alpha under an adapted model.
robotsim::Trajectory adapted_trajectory(const MetaModel& model, const AdaptedModel& adapted,
                                        std::span<const double> alpha, int robot_index);

// Posterior mean of z for a task (methods with a task encoder).
std::vector<double> task_latent_mean(const MetaModel& model, const TaskTensors& task);

Container save_meta_model(const MetaModel& model);
MetaModel load_meta_model(const Container& c);

} // namespace hyperadapt::metalearn

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

#include "models/training.hpp"

#include "ad/adam.hpp"
#include "ad/ops.hpp"
#include "common/error.hpp"

#include <cmath>
#include <numeric>

namespace hyperadapt::models {

namespace {

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng)
{
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    return order;
}

ad::DenseArray gather_rows(const ad::DenseArray& all, std::span<const std::size_t> rows)
{
    ad::DenseArray out({rows.size(), all.cols()});
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy(all.data() + rows[r] * all.cols(), all.data() + (rows[r] + 1) * all.cols(),
                  out.data() + r * all.cols());
    }
    return out;
}

// Minibatch Adam over a set of networks trained jointly. `batch_loss` builds
// the loss of one batch from the attached slices of every network.
template <typename BatchLoss>
std::vector<double> fit_networks(std::vector<DenseNet*> nets, std::size_t n, const FitConfig& config,
                                 std::string_view stage, Rng& shuffle_rng, BatchLoss&& batch_loss)
{
    if (n == 0) {
        throw Error(ErrorKind::invalid_argument, std::string(stage) + ": empty training set");
    }
    std::vector<ad::AdamState> states;
    for (const DenseNet* net : nets) {
        states.emplace_back(net->size());
    }
    const ad::AdamConfig adam{config.lr};
    const std::size_t batch = std::max<std::size_t>(1, std::min(config.batch_size, n));
    std::vector<double> epoch_loss;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const std::vector<std::size_t> order = shuffled(n, shuffle_rng);
        double total = 0.0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < n; begin += batch) {
            const std::size_t count = std::min(batch, n - begin);
            const std::span<const std::size_t> rows(order.data() + begin, count);
            ad::Tape tape;
            std::vector<std::vector<ad::Var>> slices;
            std::vector<ad::Var> all;
            for (const DenseNet* net : nets) {
                slices.push_back(net->attach(tape));
                all.insert(all.end(), slices.back().begin(), slices.back().end());
            }
            const ad::Var loss = batch_loss(tape, slices, rows);
            const double value = loss.value().item();
            if (!std::isfinite(value)) {
                throw NonFiniteError(std::string(stage) + ": loss diverged at epoch " + std::to_string(epoch));
            }
            const std::vector<ad::Var> grads = tape.grad(loss, all, false);
            std::vector<std::vector<double>> flat;
            std::size_t offset = 0;
            for (const DenseNet* net : nets) {
                const std::size_t k = net->layout.slices().size();
                flat.emplace_back(net->size());
                net->layout.gather(std::span(grads).subspan(offset, k), flat.back());
                offset += k;
            }
            for (std::size_t i = 0; i < nets.size(); ++i) {
                ad::adam_step(nets[i]->params, flat[i], states[i], adam);
            }
            total += value;
            ++batches;
        }
        epoch_loss.push_back(total / static_cast<double>(batches));
    }
    return epoch_loss;
}

} // namespace

TrajectoryVAE train_vae(std::span<const robotsim::Trajectory> data, const ModelDims& dims,
                        const FitConfig& config, std::uint64_t seed, std::vector<double>* epoch_loss)
{
    Rng init(seed, "vae/init");
    Rng shuffle(seed, "vae/shuffle");
    Rng noise(seed, "vae/noise");
    TrajectoryVAE vae = make_vae(dims, init);
    vae.norm = Normalizer::fit_trajectories(data);
    const ad::DenseArray x = trajectory_rows(data, vae.norm);

    auto losses = fit_networks({&vae.encoder, &vae.decoder}, data.size(), config, "train_vae", shuffle,
                               [&](ad::Tape& tape, const std::vector<std::vector<ad::Var>>& s,
                                   std::span<const std::size_t> rows) {
                                   ad::DenseArray eps({rows.size(), dims.alpha});
                                   for (std::size_t i = 0; i < eps.size(); ++i) {
                                       eps[i] = noise.normal();
                                   }
                                   return vae_loss(s[0], s[1], tape.constant(gather_rows(x, rows)),
                                                   tape.constant(std::move(eps)));
                               });
    if (epoch_loss != nullptr) {
        *epoch_loss = std::move(losses);
    }
    return vae;
}

double reconstruction_rmse(const TrajectoryVAE& vae, std::span<const robotsim::Trajectory> data)
{
    const auto alphas = encode_alphas(vae, data);
    double sq = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const robotsim::Trajectory rec = decode(vae.decoder, alphas[i], vae.norm);
        sq += (rec.commands - data[i].commands).squaredNorm();
    }
    return std::sqrt(sq / static_cast<double>(data.size() * robotsim::kTrajectorySize));
}

SubPolicy train_subpolicy(const TrajectoryVAE& vae, std::span<const robotsim::Goal> goals,
                          std::span<const robotsim::Trajectory> data, std::size_t goal_dim,
                          const ModelDims& dims, const FitConfig& config, std::uint64_t seed,
                          std::vector<double>* epoch_loss)
{
    if (goals.size() != data.size()) {
        throw Error(ErrorKind::invalid_argument, "train_subpolicy: goals and trajectories differ in count");
    }
    Rng init(seed, "subpolicy/init");
    Rng shuffle(seed, "subpolicy/shuffle");
    SubPolicy policy = make_subpolicy(dims, goal_dim, init);

    std::vector<std::vector<double>> goal_vectors;
    for (const robotsim::Goal& g : goals) {
        goal_vectors.emplace_back(g.position.data(), g.position.data() + goal_dim);
    }
    policy.goal_norm = Normalizer::fit_rows(goal_vectors);
    const ad::DenseArray inputs = goal_rows(policy, goals);

    const auto alphas = encode_alphas(vae, data);
    ad::DenseArray targets({alphas.size(), dims.alpha});
    for (std::size_t r = 0; r < alphas.size(); ++r) {
        std::copy(alphas[r].begin(), alphas[r].end(), targets.data() + r * dims.alpha);
    }

    auto losses = fit_networks({&policy.net}, goals.size(), config, "train_subpolicy", shuffle,
                               [&](ad::Tape& tape, const std::vector<std::vector<ad::Var>>& s,
                                   std::span<const std::size_t> rows) {
                                   const ad::Var head =
                                       dense_forward(s[0], tape.constant(gather_rows(inputs, rows)));
                                   return gaussian_nll(split_gaussian_head(head),
                                                       tape.constant(gather_rows(targets, rows)));
                               });
    if (epoch_loss != nullptr) {
        *epoch_loss = std::move(losses);
    }
    return policy;
}

} // namespace hyperadapt::models

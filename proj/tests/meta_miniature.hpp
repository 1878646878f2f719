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

// Miniature meta-learning problems small enough to check every parameter by
// finite differences. Shared by the metalearn tests and the acceptance suite.

#include "ad/ops.hpp"
#include "common/rng.hpp"
#include "fd_oracle.hpp"
#include "metalearn/meta.hpp"
#include "models/gaussian.hpp"
#include "models/networks.hpp"

#include <functional>
#include <span>
#include <vector>

namespace hyperadapt::testing {

inline std::vector<double> random_vector(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0)
{
    std::vector<double> v(n);
    for (double& x : v) {
        x = rng.uniform(lo, hi);
    }
    return v;
}

// A tiny problem with 6-element "trajectories" so every parameter can be
// checked by finite differences.
inline models::ModelDims miniature_dims()
{
    models::ModelDims d;
    d.trajectory = 6;
    d.alpha = 2;
    d.z = 2;
    d.support = 5;
    d.decoder_hidden = 3;
    d.vae_encoder_hidden = {4};
    d.task_encoder_hidden = {4};
    d.hypernet_hidden = {4};
    return d;
}

inline metalearn::TaskTensors synthetic_task(const models::ModelDims& d, Rng& rng, std::size_t queries = 7)
{
    metalearn::TaskTensors t;
    t.robot = "synthetic";
    t.support_alpha = ad::DenseArray({d.support, d.alpha}, random_vector(d.support * d.alpha, rng));
    t.support_x = ad::DenseArray({d.support, d.trajectory}, random_vector(d.support * d.trajectory, rng));
    t.support_flat = ad::DenseArray({1, t.support_x.size()},
                                    std::vector<double>(t.support_x.values().begin(), t.support_x.values().end()));
    t.query_alpha = ad::DenseArray({queries, d.alpha}, random_vector(queries * d.alpha, rng));
    t.query_x = ad::DenseArray({queries, d.trajectory}, random_vector(queries * d.trajectory, rng));
    return t;
}

inline models::TrajectoryVAE reference_vae(const models::ModelDims& d, std::uint64_t seed)
{
    Rng rng(seed);
    models::TrajectoryVAE vae = models::make_vae(d, rng);
    vae.norm = models::Normalizer::identity(d.trajectory);
    return vae;
}

inline std::vector<models::DenseNet*> nets_of(metalearn::MetaModel& m)
{
    std::vector<models::DenseNet*> out;
    for (models::DenseNet* n : {&m.encoder.net, &m.hypernet.net, &m.decoder}) {
        if (n->size() > 0) {
            out.push_back(n);
        }
    }
    return out;
}

inline std::vector<double> flat_params(metalearn::MetaModel& m)
{
    std::vector<double> out;
    for (const models::DenseNet* n : nets_of(m)) {
        out.insert(out.end(), n->params.begin(), n->params.end());
    }
    if (m.method == metalearn::Method::ours || m.method == metalearn::Method::maml) {
        out.push_back(m.lambda);
    }
    return out;
}

inline void set_params(metalearn::MetaModel& m, std::span<const double> flat)
{
    std::size_t offset = 0;
    for (models::DenseNet* n : nets_of(m)) {
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                  flat.begin() + static_cast<std::ptrdiff_t>(offset + n->size()), n->params.begin());
        offset += n->size();
    }
    if (m.method == metalearn::Method::ours || m.method == metalearn::Method::maml) {
        m.lambda = flat[offset];
    }
}

// Summed outer loss over `tasks` with replayed noise, and its analytic
// gradient over every parameter (flattened like flat_params).
inline double objective(const metalearn::MetaModel& m, std::span<const metalearn::TaskTensors> tasks,
                        const metalearn::TrainConfig& config,
                 std::span<const double> noise, std::vector<double>* gradient)
{
    ad::Tape tape;
    const metalearn::AttachedModel params = metalearn::attach(m, tape);
    std::size_t next = 0;
    const std::function<double()> normal = [&] { return noise[next++ % noise.size()]; };
    ad::Var loss;
    for (const metalearn::TaskTensors& t : tasks) {
        const ad::Var l = metalearn::task_loss(m, params, t, config, normal).total;
        loss = loss.valid() ? ad::add(loss, l) : l;
    }
    if (gradient != nullptr) {
        const std::vector<ad::Var> wrt = params.all();
        const std::vector<ad::Var> g = tape.grad(loss, wrt, false);
        gradient->clear();
        for (const ad::Var& v : g) {
            gradient->insert(gradient->end(), v.value().values().begin(), v.value().values().end());
        }
    }
    return loss.value().item();
}

inline double fd_error(metalearn::MetaModel m, std::span<const metalearn::TaskTensors> tasks,
                       const metalearn::TrainConfig& config,
                std::span<const double> noise)
{
    std::vector<double> analytic;
    objective(m, tasks, config, noise, &analytic);
    const std::vector<double> x0 = flat_params(m);
    const auto numeric = central_difference(
        [&](std::span<const double> x) {
            set_params(m, x);
            return objective(m, tasks, config, noise, nullptr);
        },
        x0);
        return max_relative_error(analytic, numeric, scaled_floor(numeric));
}

// First-order MAML gradient against its defining surrogate: the query loss at
// phi - lambda * g0 with the support gradient g0 frozen at the current phi.
inline double first_order_fd_error(const metalearn::MetaModel& m, const metalearn::TaskTensors& task,
                                   const metalearn::TrainConfig& config)
{
    const std::vector<double> noise{0.0};
    const metalearn::TaskTensors tasks[] = {task};
    std::vector<double> analytic;
    objective(m, tasks, config, noise, &analytic);

    ad::Tape tape;
    const auto phi0 = m.decoder.attach(tape);
    const ad::Var sa = tape.constant(task.support_alpha);
    const ad::Var sx = tape.constant(task.support_x);
    const auto g0 = tape.grad(models::unit_gaussian_nll(models::dense_forward(phi0, sa), sx), phi0, false);
    std::vector<double> frozen(m.decoder.size());
    m.decoder.layout.gather(g0, frozen);

    std::vector<double> x0 = m.decoder.params;
    x0.push_back(m.lambda);
    const auto numeric = central_difference(
        [&](std::span<const double> x) {
            models::DenseNet d = m.decoder;
            for (std::size_t i = 0; i < d.size(); ++i) {
                d.params[i] = x[i] - x.back() * frozen[i];
            }
            const ad::DenseArray pred = models::decode_rows(d, task.query_alpha);
            ad::Tape t;
            return models::unit_gaussian_nll(t.constant(pred), t.constant(task.query_x)).value().item();
        },
        x0);
    return max_relative_error(analytic, numeric, scaled_floor(numeric));
}

} // namespace hyperadapt::testing

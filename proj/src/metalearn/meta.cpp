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

#include "metalearn/meta.hpp"

#include "ad/ops.hpp"
#include "common/error.hpp"
#include "models/checkpoint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hyperadapt::metalearn {

namespace {

using models::DenseNet;

bool uses_encoder(Method m) { return m != Method::maml; }
bool uses_hypernet(Method m) { return m == Method::ours || m == Method::avi; }
bool uses_lambda(Method m) { return m == Method::ours || m == Method::maml; }

ad::DenseArray rows_of(std::span<const robotsim::TaskSample> samples, const models::Normalizer& norm)
{
    std::vector<robotsim::Trajectory> taus;
    for (const auto& s : samples) {
        taus.push_back(s.tau);
    }
    return models::trajectory_rows(taus, norm);
}

ad::DenseArray alphas_of(std::span<const robotsim::TaskSample> samples)
{
    if (samples.empty()) {
        return {};
    }
    const std::size_t d = samples.front().alpha.size();
    if (d == 0) {
        throw Error(ErrorKind::invalid_argument, "meta task: action latents have not been attached");
    }
    ad::DenseArray out({samples.size(), d});
    for (std::size_t r = 0; r < samples.size(); ++r) {
        if (samples[r].alpha.size() != d) {
            throw ShapeError("meta task: ragged action latents");
        }
        std::copy(samples[r].alpha.begin(), samples[r].alpha.end(), out.data() + r * d);
    }
    return out;
}

ad::DenseArray flatten(const ad::DenseArray& rows)
{
    return {{1, rows.size()}, std::vector<double>(rows.values().begin(), rows.values().end())};
}

std::vector<double> flat_values(std::span<const ad::Var> slices, const ad::ParamLayout& layout)
{
    std::vector<double> out(layout.total());
    layout.gather(slices, out);
    return out;
}

struct Objective {
    ad::Var total;
    ad::Var nll;
    ad::Var kl;
};

// z ~ q(z | support) by reparameterization.
ad::Var sample_task_latent(const AttachedModel& p, const ad::Var& support_flat, ad::Var* kl,
                           const std::function<double()>& normal)
{
    const models::GaussianVar q = models::split_gaussian_head(models::dense_forward(p.encoder, support_flat));
    if (kl != nullptr) {
        *kl = models::kl_standard_normal(q);
    }
    return models::sample(q, normal);
}

nlohmann::json dims_to_json(const models::ModelDims& d)
{
    return {{"trajectory", d.trajectory},
            {"alpha", d.alpha},
            {"z", d.z},
            {"support", d.support},
            {"decoder_hidden", d.decoder_hidden},
            {"vae_encoder_hidden", d.vae_encoder_hidden},
            {"subpolicy_hidden", d.subpolicy_hidden},
            {"task_encoder_hidden", d.task_encoder_hidden},
            {"hypernet_hidden", d.hypernet_hidden}};
}

models::ModelDims dims_from_json(const nlohmann::json& j)
{
    models::ModelDims d;
    d.trajectory = j.at("trajectory").get<std::size_t>();
    d.alpha = j.at("alpha").get<std::size_t>();
    d.z = j.at("z").get<std::size_t>();
    d.support = j.at("support").get<std::size_t>();
    d.decoder_hidden = j.at("decoder_hidden").get<std::size_t>();
    d.vae_encoder_hidden = j.at("vae_encoder_hidden").get<std::vector<std::size_t>>();
    d.subpolicy_hidden = j.at("subpolicy_hidden").get<std::vector<std::size_t>>();
    d.task_encoder_hidden = j.at("task_encoder_hidden").get<std::vector<std::size_t>>();
    d.hypernet_hidden = j.at("hypernet_hidden").get<std::vector<std::size_t>>();
    return d;
}

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng)
{
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    return order;
}

struct BatchResult {
    double total = 0.0;
    double nll = 0.0;
    double kl = 0.0;
};

// Builds the summed loss of one meta-batch and, with `update`, applies one
// Adam step to every trainable part of the model.
BatchResult run_batch(MetaModel& model, std::span<const TaskTensors> tasks, std::span<const std::size_t> batch,
                      const TrainConfig& config, Rng& noise, bool update, std::size_t epoch)
{
    ad::Tape tape;
    const AttachedModel params = attach(model, tape);
    const std::function<double()> normal = [&noise] { return noise.normal(); };
    BatchResult result;
    ad::Var loss;
    for (const std::size_t index : batch) {
        TaskLoss t;
        try {
            t = task_loss(model, params, tasks[index], config, normal);
        } catch (const Error& e) {
            throw Error(e.kind(), "meta-train " + std::string(method_name(model.method)) + ": epoch "
                                      + std::to_string(epoch) + ", task " + tasks[index].robot + ": " + e.what());
        }
        loss = loss.valid() ? ad::add(loss, t.total) : t.total;
        result.total += t.total.value().item();
        result.nll += t.nll;
        result.kl += t.kl;
    }
    if (!update) {
        return result;
    }

    const std::vector<ad::Var> wrt = params.all();
    const std::vector<ad::Var> grads = tape.grad(loss, wrt, false);
    for (const ad::Var& g : grads) {
        if (!g.value().all_finite()) {
            throw NonFiniteError("meta-train " + std::string(method_name(model.method)) + ": epoch "
                                 + std::to_string(epoch) + ": non-finite outer gradient");
        }
    }
    const ad::AdamConfig adam{config.lr};
    std::size_t offset = 0;
    auto step_net = [&](DenseNet& net, ad::AdamState& state, std::size_t count) {
        std::vector<double> flat(net.size());
        net.layout.gather(std::span(grads).subspan(offset, count), flat);
        ad::adam_step(net.params, flat, state, adam);
        offset += count;
    };
    if (!params.encoder.empty()) {
        step_net(model.encoder.net, model.encoder_state, params.encoder.size());
    }
    if (!params.hypernet.empty()) {
        step_net(model.hypernet.net, model.hypernet_state, params.hypernet.size());
    }
    if (!params.decoder.empty()) {
        step_net(model.decoder, model.decoder_state, params.decoder.size());
    }
    if (params.lambda.valid()) {
        if (!config.freeze_lambda) {
            const double g = grads[offset].value().item();
            ad::adam_step(std::span(&model.lambda, 1), std::span(&g, 1), model.lambda_state, adam);
            model.lambda = std::max(model.lambda, 0.0);
        }
        ++offset;
    }
    return result;
}

std::string epoch_stream(std::string_view what, std::size_t epoch)
{
    return "meta/" + std::string(what) + "/" + std::to_string(epoch);
}

} // namespace

std::string_view method_name(Method m)
{
    switch (m) {
    case Method::ours: return "ours";
    case Method::maml: return "maml";
    case Method::versa: return "versa";
    case Method::avi: return "avi";
    }
    return "unknown";
}

Method parse_method(std::string_view name)
{
    for (const Method m : kMethods) {
        if (method_name(m) == name) {
            return m;
        }
    }
    throw Error(ErrorKind::invalid_argument,
                "unknown method '" + std::string(name) + "' (expected ours, maml, versa or avi)");
}

bool is_probabilistic(Method m)
{
    return m != Method::maml;
}

TaskTensors make_support_tensors(const robotsim::RobotInstance& robot,
                                 std::span<const robotsim::TaskSample> support, const models::Normalizer& norm)
{
    TaskTensors t;
    t.robot = robot.name();
    t.platform = robot.platform;
    t.support_alpha = alphas_of(support);
    t.support_x = rows_of(support, norm);
    t.support_flat = flatten(t.support_x);
    return t;
}

TaskTensors make_task_tensors(const robotsim::MetaTaskDataset& task, const models::Normalizer& norm)
{
    TaskTensors t = make_support_tensors(task.robot, task.support, norm);
    t.query_alpha = alphas_of(task.query);
    t.query_x = rows_of(task.query, norm);
    return t;
}

MetaModel init_meta_model(Method method, const models::ModelDims& dims, const models::TrajectoryVAE& canonical,
                          const TrainConfig& config)
{
    MetaModel m;
    m.method = method;
    m.dims = dims;
    m.norm = canonical.norm;
    if (canonical.decoder.widths != dims.decoder_widths()) {
        throw ShapeError("meta model: canonical decoder widths do not match the model dimensions");
    }
    const std::vector<double>& reference = canonical.decoder.params;

    if (uses_encoder(method)) {
        Rng rng(config.seed, "meta/init/encoder");
        m.encoder = models::make_task_encoder(dims, rng);
        m.encoder_state = ad::AdamState(m.encoder.net.size());
    }
    if (uses_hypernet(method)) {
        Rng rng(config.seed, "meta/init/hypernet");
        m.hypernet = models::make_hypernetwork(dims, rng, config.warm_start ? config.output_gain : 1.0);
        if (config.warm_start) {
            const ad::ParamSlice& bias = m.hypernet.net.layout.slices().back();
            std::copy(reference.begin(), reference.end(),
                      m.hypernet.net.params.begin() + static_cast<std::ptrdiff_t>(bias.offset));
        }
        m.hypernet_state = ad::AdamState(m.hypernet.net.size());
    }
    if (method == Method::maml) {
        Rng rng(config.seed, "meta/init/decoder");
        m.decoder = DenseNet(dims.decoder_widths());
        m.decoder.initialize(rng);
        if (config.warm_start) {
            m.decoder.params = reference;
        }
        m.decoder_state = ad::AdamState(m.decoder.size());
    }
    if (method == Method::versa) {
        Rng rng(config.seed, "meta/init/decoder");
        m.decoder = DenseNet(dims.versa_decoder_widths());
        m.decoder.initialize(rng);
        if (config.warm_start) {
            // W1 rows 0..alpha-1 take the canonical weights; the z rows keep
            // a scaled random initialization. Everything after W1 is copied.
            const std::size_t hidden = dims.decoder_hidden;
            const std::size_t alpha_part = dims.alpha * hidden;
            std::copy(reference.begin(), reference.begin() + static_cast<std::ptrdiff_t>(alpha_part),
                      m.decoder.params.begin());
            for (std::size_t i = alpha_part; i < (dims.alpha + dims.z) * hidden; ++i) {
                m.decoder.params[i] *= config.output_gain;
            }
            std::copy(reference.begin() + static_cast<std::ptrdiff_t>(alpha_part), reference.end(),
                      m.decoder.params.begin() + static_cast<std::ptrdiff_t>((dims.alpha + dims.z) * hidden));
        }
        m.decoder_state = ad::AdamState(m.decoder.size());
    }
    if (uses_lambda(method)) {
        m.lambda = config.lambda_init;
        m.lambda_state = ad::AdamState(1);
    }
    return m;
}

std::vector<ad::Var> inner_adapt(std::span<const ad::Var> phi, const ad::Var& support_alpha,
                                 const ad::Var& support_x, const ad::Var& lambda, InnerMode mode,
                                 std::size_t steps)
{
    if (support_alpha.shape().rows != support_x.shape().rows) {
        throw ShapeError("inner_adapt: support alpha and trajectories differ in row count");
    }
    std::vector<ad::Var> theta(phi.begin(), phi.end());
    ad::Tape& tape = support_x.tape();
    for (std::size_t s = 0; s < steps; ++s) {
        const ad::Var loss = models::unit_gaussian_nll(models::dense_forward(theta, support_alpha), support_x);
        const std::vector<ad::Var> g = tape.grad(loss, theta, mode == InnerMode::second_order);
        for (std::size_t k = 0; k < theta.size(); ++k) {
            if (!g[k].value().all_finite()) {
                throw NonFiniteError("inner_adapt: non-finite inner gradient");
            }
            theta[k] = ad::sub(theta[k], ad::scalar_mul(lambda, g[k]));
        }
    }
    return theta;
}

std::vector<ad::Var> AttachedModel::all() const
{
    std::vector<ad::Var> out;
    out.insert(out.end(), encoder.begin(), encoder.end());
    out.insert(out.end(), hypernet.begin(), hypernet.end());
    out.insert(out.end(), decoder.begin(), decoder.end());
    if (lambda.valid()) {
        out.push_back(lambda);
    }
    return out;
}

AttachedModel attach(const MetaModel& model, ad::Tape& tape)
{
    AttachedModel p;
    if (uses_encoder(model.method)) {
        p.encoder = model.encoder.net.attach(tape);
    }
    if (uses_hypernet(model.method)) {
        p.hypernet = model.hypernet.net.attach(tape);
    }
    if (model.method == Method::maml || model.method == Method::versa) {
        p.decoder = model.decoder.attach(tape);
    }
    if (uses_lambda(model.method)) {
        p.lambda = tape.leaf(ad::DenseArray::scalar(model.lambda));
    }
    return p;
}

TaskLoss task_loss(const MetaModel& model, const AttachedModel& params, const TaskTensors& task,
                   const TrainConfig& config, const std::function<double()>& normal)
{
    ad::Tape& tape = params.all().front().tape();
    const ad::Var support_alpha = tape.constant(task.support_alpha);
    const ad::Var support_x = tape.constant(task.support_x);
    const ad::Var query_alpha = tape.constant(task.query_alpha);
    const ad::Var query_x = tape.constant(task.query_x);
    const InnerMode mode = config.second_order ? InnerMode::second_order : InnerMode::first_order;
    const ad::ParamLayout layout = ad::ParamLayout::dense_stack(model.dims.decoder_widths());

    ad::Var prediction;
    ad::Var kl;
    switch (model.method) {
    case Method::ours:
    case Method::avi: {
        const ad::Var z = sample_task_latent(params, tape.constant(task.support_flat), &kl, normal);
        std::vector<ad::Var> theta = layout.bind(models::dense_forward(params.hypernet, z));
        if (model.method == Method::ours) {
            theta = inner_adapt(theta, support_alpha, support_x, params.lambda, mode, config.inner_steps);
        }
        prediction = models::dense_forward(theta, query_alpha);
        break;
    }
    case Method::maml: {
        const std::vector<ad::Var> theta =
            inner_adapt(params.decoder, support_alpha, support_x, params.lambda, mode, config.inner_steps);
        prediction = models::dense_forward(theta, query_alpha);
        break;
    }
    case Method::versa: {
        const ad::Var z = sample_task_latent(params, tape.constant(task.support_flat), &kl, normal);
        const ad::Var input = ad::concat(query_alpha, ad::broadcast_rows(z, task.query_alpha.rows()));
        prediction = models::dense_forward(params.decoder, input);
        break;
    }
    }

    TaskLoss out;
    const ad::Var nll = models::unit_gaussian_nll(prediction, query_x);
    out.nll = nll.value().item();
    if (kl.valid()) {
        out.kl = kl.value().item();
        out.total = ad::add(nll, ad::scale(kl, config.beta));
    } else {
        out.total = nll;
    }
    if (!out.total.value().all_finite()) {
        throw NonFiniteError("task loss is not finite");
    }
    return out;
}

std::vector<EpochMetrics> meta_train(MetaModel& model, std::span<const TaskTensors> tasks,
                                     const TrainConfig& config, const EpochCallback& callback)
{
    if (tasks.empty()) {
        throw Error(ErrorKind::invalid_argument, "meta-train: no tasks");
    }
    if (config.meta_batch == 0) {
        throw Error(ErrorKind::invalid_argument, "meta-train: meta-batch size must be positive");
    }
    if (config.beta < 0.0) {
        throw Error(ErrorKind::invalid_argument, "meta-train: beta must be non-negative");
    }
    std::vector<EpochMetrics> history;
    while (model.epochs_done < config.epochs) {
        const std::size_t epoch = model.epochs_done;
        Rng shuffle(config.seed, epoch_stream("shuffle", epoch));
        Rng noise(config.seed, epoch_stream("noise", epoch));
        const std::vector<std::size_t> order = shuffled(tasks.size(), shuffle);
        EpochMetrics m;
        m.epoch = epoch + 1;
        for (std::size_t begin = 0; begin < order.size(); begin += config.meta_batch) {
            const std::size_t count = std::min(config.meta_batch, order.size() - begin);
            const BatchResult r = run_batch(model, tasks, std::span(order).subspan(begin, count), config,
                                            noise, true, m.epoch);
            m.total += r.total;
            m.nll += r.nll;
            m.kl += r.kl;
        }
        const double n = static_cast<double>(tasks.size());
        m.total /= n;
        m.nll /= n;
        m.kl /= n;
        m.lambda = model.lambda;
        ++model.epochs_done;
        history.push_back(m);
        if (callback) {
            callback(m, model);
        }
    }
    return history;
}

double next_step_loss(const MetaModel& model, std::span<const TaskTensors> tasks, const TrainConfig& config)
{
    const std::size_t epoch = model.epochs_done;
    Rng shuffle(config.seed, epoch_stream("shuffle", epoch));
    Rng noise(config.seed, epoch_stream("noise", epoch));
    const std::vector<std::size_t> order = shuffled(tasks.size(), shuffle);
    const std::size_t count = std::min(config.meta_batch, order.size());
    MetaModel copy = model;
    return run_batch(copy, tasks, std::span(order).subspan(0, count), config, noise, false, epoch + 1).total;
}

std::vector<AdaptedModel> meta_test(const MetaModel& model, const TaskTensors& support, const TrainConfig& config,
                                    std::uint64_t stream_seed)
{
    if (support.support_x.rows() != model.dims.support) {
        throw Error(ErrorKind::invalid_argument, "meta-test: expected " + std::to_string(model.dims.support)
                                                     + " support trajectories, got "
                                                     + std::to_string(support.support_x.rows()));
    }
    Rng noise(stream_seed);
    const std::function<double()> normal = [&noise] { return noise.normal(); };
    const std::size_t count = is_probabilistic(model.method) ? std::max<std::size_t>(config.samples, 1) : 1;
    const ad::ParamLayout layout = ad::ParamLayout::dense_stack(model.dims.decoder_widths());

    std::vector<AdaptedModel> out;
    for (std::size_t j = 0; j < count; ++j) {
        ad::Tape tape;
        const AttachedModel params = attach(model, tape);
        const ad::Var support_alpha = tape.constant(support.support_alpha);
        const ad::Var support_x = tape.constant(support.support_x);
        auto support_nll = [&](std::span<const ad::Var> theta) {
            return models::unit_gaussian_nll(models::dense_forward(theta, support_alpha), support_x)
                .value()
                .item();
        };

        AdaptedModel a;
        std::vector<ad::Var> theta;
        switch (model.method) {
        case Method::ours:
        case Method::avi:
        case Method::versa: {
            const ad::Var z = sample_task_latent(params, tape.constant(support.support_flat), nullptr, normal);
            a.z.assign(z.value().values().begin(), z.value().values().end());
            if (model.method == Method::versa) {
                const ad::Var input =
                    ad::concat(support_alpha, ad::broadcast_rows(z, support.support_alpha.rows()));
                a.support_nll_before =
                    models::unit_gaussian_nll(models::dense_forward(params.decoder, input), support_x)
                        .value()
                        .item();
                a.support_nll_after = a.support_nll_before;
                a.theta = model.decoder.params;
                out.push_back(std::move(a));
                continue;
            }
            theta = layout.bind(models::dense_forward(params.hypernet, z));
            break;
        }
        case Method::maml:
            theta = params.decoder;
            break;
        }
        a.support_nll_before = support_nll(theta);
        if (uses_lambda(model.method)) {
            theta = inner_adapt(theta, support_alpha, support_x, params.lambda, InnerMode::first_order,
                                config.inner_steps);
        }
        a.support_nll_after = support_nll(theta);
        a.theta = flat_values(theta, layout);
        out.push_back(std::move(a));
    }
    return out;
}

robotsim::Trajectory adapted_trajectory(const MetaModel& model, const AdaptedModel& adapted,
                                        std::span<const double> alpha, int robot_index)
{
    if (model.method == Method::versa) {
        DenseNet decoder(model.dims.versa_decoder_widths());
        decoder.params = adapted.theta;
        std::vector<double> input(alpha.begin(), alpha.end());
        input.insert(input.end(), adapted.z.begin(), adapted.z.end());
        return models::decode(decoder, input, model.norm, robot_index);
    }
    return models::decode(models::bind_params(adapted.theta, model.dims), alpha, model.norm, robot_index);
}

std::vector<double> task_latent_mean(const MetaModel& model, const TaskTensors& task)
{
    if (!uses_encoder(model.method)) {
        throw Error(ErrorKind::invalid_argument,
                    "latents: method " + std::string(method_name(model.method)) + " has no task encoder");
    }
    ad::Tape tape;
    const ad::Tape::NoGradGuard guard(tape);
    const std::vector<ad::Var> enc = model.encoder.net.attach(tape);
    const ad::Var head = models::dense_forward(enc, tape.constant(task.support_flat));
    return models::row_gaussian(models::split_gaussian_head(head), 0).mean;
}

Container save_meta_model(const MetaModel& model)
{
    Container c = models::new_checkpoint("meta:" + std::string(method_name(model.method)));
    c.manifest["method"] = method_name(model.method);
    c.manifest["dims"] = dims_to_json(model.dims);
    c.manifest["epochs_done"] = model.epochs_done;
    models::add_normalizer(c, "trajectory_norm", model.norm);
    if (uses_encoder(model.method)) {
        models::add_net(c, "task_encoder", model.encoder.net);
        models::add_adam(c, "task_encoder_adam", model.encoder_state);
    }
    if (uses_hypernet(model.method)) {
        models::add_net(c, "hypernet", model.hypernet.net);
        models::add_adam(c, "hypernet_adam", model.hypernet_state);
    }
    if (model.method == Method::maml || model.method == Method::versa) {
        models::add_net(c, "decoder", model.decoder);
        models::add_adam(c, "decoder_adam", model.decoder_state);
    }
    if (uses_lambda(model.method)) {
        models::add_block(c, "lambda", std::span(&model.lambda, 1));
        models::add_adam(c, "lambda_adam", model.lambda_state);
    }
    return c;
}

MetaModel load_meta_model(const Container& c)
{
    const Method method = parse_method(c.manifest.at("method").get<std::string>());
    models::expect_kind(c, "meta:" + std::string(method_name(method)));
    MetaModel m;
    m.method = method;
    m.dims = dims_from_json(c.manifest.at("dims"));
    m.epochs_done = c.manifest.at("epochs_done").get<std::size_t>();
    m.norm = models::read_normalizer(c, "trajectory_norm");
    if (uses_encoder(method)) {
        m.encoder.net = models::read_net(c, "task_encoder");
        m.encoder_state = models::read_adam(c, "task_encoder_adam");
    }
    if (uses_hypernet(method)) {
        m.hypernet.net = models::read_net(c, "hypernet");
        m.hypernet_state = models::read_adam(c, "hypernet_adam");
    }
    if (method == Method::maml || method == Method::versa) {
        m.decoder = models::read_net(c, "decoder");
        m.decoder_state = models::read_adam(c, "decoder_adam");
    }
    if (uses_lambda(method)) {
        m.lambda = models::read_block(c, "lambda").at(0);
        m.lambda_state = models::read_adam(c, "lambda_adam");
    }
    return m;
}

} // namespace hyperadapt::metalearn

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

#include "models/networks.hpp"

#include "ad/ops.hpp"
#include "common/error.hpp"

namespace hyperadapt::models {

namespace {

std::vector<std::size_t> widths_of(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out)
{
    std::vector<std::size_t> w{in};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(out);
    return w;
}

} // namespace

std::vector<std::size_t> ModelDims::decoder_widths() const
{
    return {alpha, decoder_hidden, trajectory};
}

std::vector<std::size_t> ModelDims::versa_decoder_widths() const
{
    return {alpha + z, decoder_hidden, trajectory};
}

std::size_t ModelDims::decoder_size() const
{
    return ad::ParamLayout::dense_stack(decoder_widths()).total();
}

TrajectoryVAE make_vae(const ModelDims& dims, Rng& rng)
{
    TrajectoryVAE vae;
    vae.encoder = DenseNet(widths_of(dims.trajectory, dims.vae_encoder_hidden, 2 * dims.alpha));
    vae.decoder = DenseNet(dims.decoder_widths());
    vae.encoder.initialize(rng);
    vae.decoder.initialize(rng);
    vae.norm = Normalizer::identity(dims.trajectory);
    return vae;
}

SubPolicy make_subpolicy(const ModelDims& dims, std::size_t goal_dim, Rng& rng)
{
    if (goal_dim != 2 && goal_dim != 3) {
        throw Error(ErrorKind::invalid_argument, "sub-policy: goal dimension must be 2 or 3");
    }
    SubPolicy p;
    p.goal_dim = goal_dim;
    p.net = DenseNet(widths_of(goal_dim, dims.subpolicy_hidden, 2 * dims.alpha));
    p.net.initialize(rng);
    p.goal_norm = Normalizer::identity(goal_dim);
    return p;
}

TaskEncoder make_task_encoder(const ModelDims& dims, Rng& rng)
{
    TaskEncoder e;
    e.net = DenseNet(widths_of(dims.support * dims.trajectory, dims.task_encoder_hidden, 2 * dims.z));
    e.net.initialize(rng);
    return e;
}

HyperNetwork make_hypernetwork(const ModelDims& dims, Rng& rng, double output_gain)
{
    HyperNetwork h;
    h.net = DenseNet(widths_of(dims.z, dims.hypernet_hidden, dims.decoder_size()));
    h.net.initialize(rng, output_gain);
    return h;
}

ad::DenseArray trajectory_rows(std::span<const robotsim::Trajectory> data, const Normalizer& norm)
{
    ad::DenseArray out({data.size(), norm.size()});
    for (std::size_t r = 0; r < data.size(); ++r) {
        const auto flat = data[r].flat();
        const std::vector<double> x = norm.apply(flat);
        std::copy(x.begin(), x.end(), out.data() + r * norm.size());
    }
    return out;
}

ad::DenseArray support_row(std::span<const robotsim::Trajectory> support, const Normalizer& norm)
{
    const ad::DenseArray rows = trajectory_rows(support, norm);
    return {{1, rows.size()}, std::vector<double>(rows.values().begin(), rows.values().end())};
}

ad::Var vae_loss(std::span<const ad::Var> encoder, std::span<const ad::Var> decoder, const ad::Var& x,
                 const ad::Var& eps)
{
    const GaussianVar q = split_gaussian_head(dense_forward(encoder, x));
    const ad::Var alpha = ad::reparameterize(q.mean, q.logvar, eps);
    const ad::Var nll = unit_gaussian_nll(dense_forward(decoder, alpha), x);
    const double rows = static_cast<double>(x.shape().rows);
    const ad::Var loss = ad::add(nll, ad::scale(kl_standard_normal(q), 1.0 / rows));
    if (!loss.value().all_finite()) {
        throw NonFiniteError("vae_loss: non-finite loss");
    }
    return loss;
}

ad::DenseArray evaluate(const DenseNet& net, const ad::DenseArray& x)
{
    ad::Tape tape;
    const ad::Tape::NoGradGuard guard(tape);
    const std::vector<ad::Var> slices = net.attach(tape);
    return dense_forward(slices, tape.constant(x)).value();
}

DiagonalGaussian encode_alpha_distribution(const TrajectoryVAE& vae, const robotsim::Trajectory& tau)
{
    ad::Tape tape;
    const ad::Tape::NoGradGuard guard(tape);
    const std::vector<ad::Var> slices = vae.encoder.attach(tape);
    const robotsim::Trajectory one[] = {tau};
    const ad::Var head = dense_forward(slices, tape.constant(trajectory_rows(one, vae.norm)));
    return row_gaussian(split_gaussian_head(head), 0);
}

std::vector<double> encode_alpha(const TrajectoryVAE& vae, const robotsim::Trajectory& tau)
{
    return encode_alpha_distribution(vae, tau).mean;
}

std::vector<std::vector<double>> encode_alphas(const TrajectoryVAE& vae,
                                               std::span<const robotsim::Trajectory> data)
{
    const ad::DenseArray head = evaluate(vae.encoder, trajectory_rows(data, vae.norm));
    const std::size_t d = head.cols() / 2;
    std::vector<std::vector<double>> out(data.size());
    for (std::size_t r = 0; r < data.size(); ++r) {
        out[r].assign(head.data() + r * head.cols(), head.data() + r * head.cols() + d);
    }
    return out;
}

DiagonalGaussian encode_task(const TaskEncoder& encoder, std::span<const robotsim::Trajectory> support,
                             const Normalizer& norm)
{
    const std::size_t expected = encoder.net.input_width() / norm.size();
    if (support.size() != expected) {
        throw Error(ErrorKind::invalid_argument, "encode_task: expected " + std::to_string(expected)
                                                     + " support trajectories, got "
                                                     + std::to_string(support.size()));
    }
    ad::Tape tape;
    const ad::Tape::NoGradGuard guard(tape);
    const std::vector<ad::Var> slices = encoder.net.attach(tape);
    const ad::Var head = dense_forward(slices, tape.constant(support_row(support, norm)));
    return row_gaussian(split_gaussian_head(head), 0);
}

std::vector<double> generate_params(const HyperNetwork& hypernet, std::span<const double> z)
{
    if (z.size() != hypernet.net.input_width()) {
        throw ShapeError("generate_params: expected a " + std::to_string(hypernet.net.input_width())
                         + "-dimensional z, got " + std::to_string(z.size()));
    }
    const ad::DenseArray out = evaluate(hypernet.net, ad::DenseArray::row(z));
    return {out.values().begin(), out.values().end()};
}

DenseNet bind_params(std::span<const double> params, const ModelDims& dims)
{
    DenseNet decoder(dims.decoder_widths());
    if (params.size() != decoder.size()) {
        throw ShapeError("bind_params: expected " + std::to_string(decoder.size()) + " parameters, got "
                         + std::to_string(params.size()));
    }
    decoder.params.assign(params.begin(), params.end());
    return decoder;
}

std::vector<double> unbind_params(const DenseNet& decoder)
{
    return decoder.params;
}

ad::DenseArray decode_rows(const DenseNet& decoder, const ad::DenseArray& alpha)
{
    return evaluate(decoder, alpha);
}

robotsim::Trajectory decode(const DenseNet& decoder, std::span<const double> input, const Normalizer& norm,
                            int robot_index)
{
    const ad::DenseArray y = evaluate(decoder, ad::DenseArray::row(input));
    return robotsim::Trajectory::from_flat(norm.invert(y.values()), robot_index);
}

ad::DenseArray goal_rows(const SubPolicy& policy, std::span<const robotsim::Goal> goals)
{
    ad::DenseArray out({goals.size(), policy.goal_dim});
    for (std::size_t r = 0; r < goals.size(); ++r) {
        const std::vector<double> g(goals[r].position.data(), goals[r].position.data() + policy.goal_dim);
        const std::vector<double> x = policy.goal_norm.apply(g);
        std::copy(x.begin(), x.end(), out.data() + r * policy.goal_dim);
    }
    return out;
}

DiagonalGaussian policy_distribution(const SubPolicy& policy, const robotsim::Goal& goal)
{
    ad::Tape tape;
    const ad::Tape::NoGradGuard guard(tape);
    const std::vector<ad::Var> slices = policy.net.attach(tape);
    const robotsim::Goal one[] = {goal};
    const ad::Var head = dense_forward(slices, tape.constant(goal_rows(policy, one)));
    return row_gaussian(split_gaussian_head(head), 0);
}

} // namespace hyperadapt::models

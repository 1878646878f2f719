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

#include "models/checkpoint.hpp"

#include "common/error.hpp"

namespace hyperadapt::models {

namespace {

const nlohmann::json& find_block(const Container& c, const std::string& name)
{
    if (c.manifest.contains("blocks")) {
        for (const auto& b : c.manifest["blocks"]) {
            if (b.at("name") == name) {
                return b;
            }
        }
    }
    throw Error(ErrorKind::io, "checkpoint: missing block '" + name + "'");
}

} // namespace

Container new_checkpoint(const std::string& kind)
{
    Container c;
    c.manifest["kind"] = kind;
    c.manifest["version"] = kCheckpointVersion;
    c.manifest["blocks"] = nlohmann::json::array();
    return c;
}

void add_block(Container& c, const std::string& name, std::span<const double> values, nlohmann::json meta)
{
    if (has_block(c, name)) {
        throw Error(ErrorKind::invalid_argument, "checkpoint: duplicate block '" + name + "'");
    }
    nlohmann::json b;
    b["name"] = name;
    b["offset"] = c.payload.size();
    b["count"] = values.size();
    b["meta"] = std::move(meta);
    c.manifest["blocks"].push_back(std::move(b));
    c.payload.insert(c.payload.end(), values.begin(), values.end());
}

bool has_block(const Container& c, const std::string& name)
{
    if (!c.manifest.contains("blocks")) {
        return false;
    }
    for (const auto& b : c.manifest["blocks"]) {
        if (b.at("name") == name) {
            return true;
        }
    }
    return false;
}

std::vector<double> read_block(const Container& c, const std::string& name)
{
    const auto& b = find_block(c, name);
    const auto offset = b.at("offset").get<std::size_t>();
    const auto count = b.at("count").get<std::size_t>();
    if (offset + count > c.payload.size()) {
        throw Error(ErrorKind::io, "checkpoint: block '" + name + "' runs past the payload");
    }
    return {c.payload.begin() + static_cast<std::ptrdiff_t>(offset),
            c.payload.begin() + static_cast<std::ptrdiff_t>(offset + count)};
}

const nlohmann::json& block_meta(const Container& c, const std::string& name)
{
    return find_block(c, name).at("meta");
}

void expect_kind(const Container& c, const std::string& kind)
{
    const std::string found = c.manifest.value("kind", std::string("?"));
    if (found != kind) {
        throw Error(ErrorKind::io, "checkpoint: expected kind '" + kind + "', found '" + found + "'");
    }
    if (c.manifest.value("version", 0) != kCheckpointVersion) {
        throw Error(ErrorKind::io, "checkpoint: unsupported version");
    }
}

void add_net(Container& c, const std::string& name, const DenseNet& net)
{
    add_block(c, name, net.params, {{"widths", net.widths}});
}

DenseNet read_net(const Container& c, const std::string& name)
{
    DenseNet net(block_meta(c, name).at("widths").get<std::vector<std::size_t>>());
    std::vector<double> params = read_block(c, name);
    if (params.size() != net.size()) {
        throw Error(ErrorKind::io, "checkpoint: block '" + name + "' does not match its layer widths");
    }
    net.params = std::move(params);
    return net;
}

void add_normalizer(Container& c, const std::string& name, const Normalizer& norm)
{
    add_block(c, name + "/mean", norm.mean);
    add_block(c, name + "/stddev", norm.stddev);
}

Normalizer read_normalizer(const Container& c, const std::string& name)
{
    Normalizer n{read_block(c, name + "/mean"), read_block(c, name + "/stddev")};
    if (n.mean.size() != n.stddev.size()) {
        throw Error(ErrorKind::io, "checkpoint: normalizer '" + name + "' is inconsistent");
    }
    return n;
}

void add_adam(Container& c, const std::string& name, const ad::AdamState& state)
{
    add_block(c, name + "/m", state.m, {{"step", state.step}});
    add_block(c, name + "/v", state.v);
}

ad::AdamState read_adam(const Container& c, const std::string& name)
{
    ad::AdamState s;
    s.m = read_block(c, name + "/m");
    s.v = read_block(c, name + "/v");
    s.step = block_meta(c, name + "/m").at("step").get<std::int64_t>();
    return s;
}

Container save_vae(const TrajectoryVAE& vae)
{
    Container c = new_checkpoint("vae");
    add_net(c, "encoder", vae.encoder);
    add_net(c, "decoder", vae.decoder);
    add_normalizer(c, "trajectory_norm", vae.norm);
    return c;
}

TrajectoryVAE load_vae(const Container& c)
{
    expect_kind(c, "vae");
    return {read_net(c, "encoder"), read_net(c, "decoder"), read_normalizer(c, "trajectory_norm")};
}

Container save_subpolicy(const SubPolicy& policy)
{
    Container c = new_checkpoint("subpolicy");
    c.manifest["goal_dim"] = policy.goal_dim;
    add_net(c, "policy", policy.net);
    add_normalizer(c, "goal_norm", policy.goal_norm);
    return c;
}

SubPolicy load_subpolicy(const Container& c)
{
    expect_kind(c, "subpolicy");
    SubPolicy p;
    p.goal_dim = c.manifest.at("goal_dim").get<std::size_t>();
    p.net = read_net(c, "policy");
    p.goal_norm = read_normalizer(c, "goal_norm");
    return p;
}

} // namespace hyperadapt::models

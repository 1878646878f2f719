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

#include <span>
#include <string>
#include <vector>

namespace hyperadapt::models {

inline constexpr int kCheckpointVersion = 1;

// A container whose payload is a sequence of named blocks. The manifest
// lists each block's offset, length and free-form metadata.
Container new_checkpoint(const std::string& kind);
void add_block(Container& c, const std::string& name, std::span<const double> values,
               nlohmann::json meta = nlohmann::json::object());
bool has_block(const Container& c, const std::string& name);
std::vector<double> read_block(const Container& c, const std::string& name);
const nlohmann::json& block_meta(const Container& c, const std::string& name);
// Throws unless the manifest kind matches.
void expect_kind(const Container& c, const std::string& kind);

void add_net(Container& c, const std::string& name, const DenseNet& net);
DenseNet read_net(const Container& c, const std::string& name);
void add_normalizer(Container& c, const std::string& name, const Normalizer& norm);
Normalizer read_normalizer(const Container& c, const std::string& name);
void add_adam(Container& c, const std::string& name, const ad::AdamState& state);
ad::AdamState read_adam(const Container& c, const std::string& name);

Container save_vae(const TrajectoryVAE& vae);
TrajectoryVAE load_vae(const Container& c);
Container save_subpolicy(const SubPolicy& policy);
SubPolicy load_subpolicy(const Container& c);

} // namespace hyperadapt::models

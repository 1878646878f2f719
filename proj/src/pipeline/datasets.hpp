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

#include "common/container.hpp"
#include "robotsim/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hyperadapt::pipeline {

// The manifest of a dataset holds everything needed to plan it again: the
// master seed, the dataset parameters and, for task files, every robot's
// seed and link scales. Payloads are the planned goals and trajectories.

nlohmann::json dataset_config_json(const robotsim::DatasetConfig& config);
robotsim::DatasetConfig dataset_config_from_json(const nlohmann::json& j);

Container encode_canonical_set(const robotsim::CanonicalSet& set, std::uint64_t seed,
                               const robotsim::DatasetConfig& config, const std::string& config_hash);
robotsim::CanonicalSet decode_canonical_set(const Container& c);
// Plans the canonical set again from the manifest and encodes it.
Container regenerate_canonical_set(const nlohmann::json& manifest);

// Tasks without alphas (they depend on the trained VAE).
Container encode_tasks(std::span<const robotsim::MetaTaskDataset> tasks, const std::string& scenario,
                       std::uint64_t seed, const robotsim::DatasetConfig& config, const std::string& config_hash);
std::vector<robotsim::MetaTaskDataset> decode_tasks(const Container& c, const robotsim::CanonicalSet& canonical);
Container regenerate_tasks(const nlohmann::json& manifest, const robotsim::CanonicalSet& canonical);

} // namespace hyperadapt::pipeline

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

#include <nlohmann/json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hyperadapt {

// On-disk layout shared by checkpoints and datasets:
//   8 bytes   magic "HYADPT01"
//   8 bytes   manifest length n, uint64 little-endian
//   n bytes   manifest, UTF-8 JSON
//   rest      payload, float64 little-endian
struct Container {
    nlohmann::json manifest;
    std::vector<double> payload;
};

void write_container(const std::filesystem::path& path, const Container& container);
Container read_container(const std::filesystem::path& path);

// Serialized bytes, as written by write_container.
std::string encode_container(const Container& container);
Container decode_container(std::string_view bytes, const std::string& origin);

} // namespace hyperadapt

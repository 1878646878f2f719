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

#include "common/container.hpp"

#include "common/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hyperadapt {

namespace {

constexpr std::string_view kMagic = "HYADPT01";

void put_u64(std::string& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
    }
}

std::uint64_t get_u64(std::string_view in)
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[static_cast<std::size_t>(i)])) << (8 * i);
    }
    return v;
}

} // namespace

std::string encode_container(const Container& container)
{
    const std::string manifest = container.manifest.dump(2);
    std::string out;
    out.reserve(16 + manifest.size() + 8 * container.payload.size());
    out.append(kMagic);
    put_u64(out, manifest.size());
    out.append(manifest);
    for (const double v : container.payload) {
        put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

Container decode_container(std::string_view bytes, const std::string& origin)
{
    if (bytes.size() < 16 || bytes.substr(0, 8) != kMagic) {
        throw Error(ErrorKind::io, origin + ": not a hyperadapt container");
    }
    const std::uint64_t n = get_u64(bytes.substr(8, 8));
    if (n > bytes.size() - 16 || (bytes.size() - 16 - n) % 8 != 0) {
        throw Error(ErrorKind::io, origin + ": truncated or corrupt container");
    }
    Container c;
    try {
        c.manifest = nlohmann::json::parse(bytes.substr(16, n));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::io, origin + ": bad manifest: " + e.what());
    }
    const std::string_view payload = bytes.substr(16 + n);
    c.payload.resize(payload.size() / 8);
    for (std::size_t i = 0; i < c.payload.size(); ++i) {
        c.payload[i] = std::bit_cast<double>(get_u64(payload.substr(8 * i, 8)));
    }
    return c;
}

void write_container(const std::filesystem::path& path, const Container& container)
{
    const std::string bytes = encode_container(container);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::io, path.string() + ": cannot open for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorKind::io, path.string() + ": write failed");
    }
}

Container read_container(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, path.string() + ": cannot open for reading");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return decode_container(buffer.str(), path.string());
}

} // namespace hyperadapt

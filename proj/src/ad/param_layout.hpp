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

#include "ad/tape.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hyperadapt::ad {

struct ParamSlice {
    std::string name;
    std::size_t offset = 0;
    Shape shape;

    bool operator==(const ParamSlice&) const = default;
};

// Layout of a flat parameter vector as named, contiguous, disjoint slices
// that cover the whole vector in order.
class ParamLayout {
public:
    ParamLayout() = default;

    // Weights (in x out) and biases (1 x out) per consecutive width pair,
    // named W1, b1, W2, b2, ...
    static ParamLayout dense_stack(std::span<const std::size_t> widths);

    void append(std::string name, Shape shape);

    [[nodiscard]] const std::vector<ParamSlice>& slices() const noexcept { return slices_; }
    [[nodiscard]] std::size_t total() const noexcept { return total_; }
    [[nodiscard]] const ParamSlice& at(std::string_view name) const;

    // Views a 1 x total() node as one node per slice; gradients flow back
    // into `flat`.
    [[nodiscard]] std::vector<Var> bind(const Var& flat) const;
    // One leaf per slice, copied from `values`.
    [[nodiscard]] std::vector<Var> attach(Tape& tape, std::span<const double> values) const;
    // Writes per-slice gradients back into a flat vector.
    void gather(std::span<const Var> grads, std::span<double> out) const;

    bool operator==(const ParamLayout&) const = default;

private:
    std::vector<ParamSlice> slices_;
    std::size_t total_ = 0;
};

} // namespace hyperadapt::ad

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

#include "ad/param_layout.hpp"
#include "common/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hyperadapt::models {

// A stack of dense layers stored as one flat parameter vector.
struct DenseNet {
    std::vector<std::size_t> widths;
    ad::ParamLayout layout;
    std::vector<double> params;

    DenseNet() = default;
    explicit DenseNet(std::vector<std::size_t> widths);

    // He-style uniform fan-in initialization, zero biases. The last weight
    // matrix is additionally multiplied by `output_gain`.
    void initialize(Rng& rng, double output_gain = 1.0);

    [[nodiscard]] std::size_t input_width() const { return widths.front(); }
    [[nodiscard]] std::size_t output_width() const { return widths.back(); }
    [[nodiscard]] std::size_t size() const { return layout.total(); }

    // One leaf per weight and bias.
    [[nodiscard]] std::vector<ad::Var> attach(ad::Tape& tape) const;
};

// x -> affine -> ReLU -> ... -> affine over (W1, b1, W2, b2, ...) slices.
ad::Var dense_forward(std::span<const ad::Var> slices, ad::Var x);

} // namespace hyperadapt::models

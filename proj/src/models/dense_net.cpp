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

#include "models/dense_net.hpp"

#include "ad/ops.hpp"
#include "common/error.hpp"

#include <cmath>

namespace hyperadapt::models {

DenseNet::DenseNet(std::vector<std::size_t> w)
    : widths(std::move(w)), layout(ad::ParamLayout::dense_stack(widths)), params(layout.total(), 0.0)
{}

void DenseNet::initialize(Rng& rng, double output_gain)
{
    const std::size_t layers = widths.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const ad::ParamSlice& w = layout.slices()[2 * l];
        const ad::ParamSlice& b = layout.slices()[2 * l + 1];
        double bound = std::sqrt(6.0 / static_cast<double>(widths[l]));
        if (l + 1 == layers) {
            bound *= output_gain;
        }
        for (std::size_t i = 0; i < w.shape.size(); ++i) {
            params[w.offset + i] = rng.uniform(-bound, bound);
        }
        for (std::size_t i = 0; i < b.shape.size(); ++i) {
            params[b.offset + i] = 0.0;
        }
    }
}

std::vector<ad::Var> DenseNet::attach(ad::Tape& tape) const
{
    return layout.attach(tape, params);
}

ad::Var dense_forward(std::span<const ad::Var> slices, ad::Var x)
{
    if (slices.empty() || slices.size() % 2 != 0) {
        throw Error(ErrorKind::invalid_argument, "dense_forward: expected weight/bias pairs");
    }
    const std::size_t layers = slices.size() / 2;
    for (std::size_t l = 0; l < layers; ++l) {
        x = ad::add_bias(ad::matmul(x, slices[2 * l]), slices[2 * l + 1]);
        if (l + 1 < layers) {
            x = ad::relu(x);
        }
    }
    return x;
}

} // namespace hyperadapt::models

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

#include "ad/param_layout.hpp"

#include "ad/ops.hpp"
#include "common/error.hpp"

#include <algorithm>

namespace hyperadapt::ad {

ParamLayout ParamLayout::dense_stack(std::span<const std::size_t> widths)
{
    ParamLayout layout;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        const std::string index = std::to_string(k + 1);
        layout.append("W" + index, {widths[k], widths[k + 1]});
        layout.append("b" + index, {1, widths[k + 1]});
    }
    return layout;
}

void ParamLayout::append(std::string name, Shape shape)
{
    if (shape.size() == 0) {
        throw ShapeError("ParamLayout: slice '" + name + "' is empty");
    }
    slices_.push_back(ParamSlice{std::move(name), total_, shape});
    total_ += shape.size();
}

const ParamSlice& ParamLayout::at(std::string_view name) const
{
    const auto it = std::find_if(slices_.begin(), slices_.end(),
                                 [name](const ParamSlice& s) { return s.name == name; });
    if (it == slices_.end()) {
        throw Error(ErrorKind::invalid_argument, "ParamLayout: no slice named '" + std::string(name) + "'");
    }
    return *it;
}

std::vector<Var> ParamLayout::bind(const Var& flat) const
{
    if (flat.shape().size() != total_) {
        throw ShapeError("bind_params: expected " + std::to_string(total_) + " parameters, got "
                         + std::to_string(flat.shape().size()));
    }
    std::vector<Var> out;
    out.reserve(slices_.size());
    for (const ParamSlice& s : slices_) {
        out.push_back(reshape(slice(flat, s.offset, s.shape.size()), s.shape));
    }
    return out;
}

std::vector<Var> ParamLayout::attach(Tape& tape, std::span<const double> values) const
{
    if (values.size() != total_) {
        throw ShapeError("attach: expected " + std::to_string(total_) + " parameters, got "
                         + std::to_string(values.size()));
    }
    std::vector<Var> out;
    out.reserve(slices_.size());
    for (const ParamSlice& s : slices_) {
        const auto part = values.subspan(s.offset, s.shape.size());
        out.push_back(tape.leaf(DenseArray(s.shape, std::vector<double>(part.begin(), part.end()))));
    }
    return out;
}

void ParamLayout::gather(std::span<const Var> grads, std::span<double> out) const
{
    if (grads.size() != slices_.size() || out.size() != total_) {
        throw ShapeError("gather: layout has " + std::to_string(slices_.size()) + " slices / "
                         + std::to_string(total_) + " values");
    }
    for (std::size_t k = 0; k < slices_.size(); ++k) {
        const auto src = grads[k].value().values();
        std::copy(src.begin(), src.end(),
                  out.begin() + static_cast<std::ptrdiff_t>(slices_[k].offset));
    }
}

} // namespace hyperadapt::ad

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

#include "ad/tape.hpp"

#include "ad/ops.hpp"
#include "common/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

namespace hyperadapt::ad {

DenseArray::DenseArray(Shape shape, std::vector<double> values)
    : shape_(shape), values_(std::move(values))
{
    if (values_.size() != shape_.size()) {
        throw ShapeError("DenseArray: " + std::to_string(values_.size())
                         + " values do not fill shape " + shape_.str());
    }
}

double DenseArray::item() const
{
    if (shape_ != Shape{1, 1}) {
        throw ShapeError("item: expected a 1x1 array, got " + shape_.str());
    }
    return values_.front();
}

bool DenseArray::all_finite() const noexcept
{
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
}

const DenseArray& Var::value() const
{
    return tape_->value(id_);
}

Var Tape::leaf(DenseArray value)
{
    if (!value.all_finite()) {
        throw NonFiniteError("leaf: non-finite value of shape " + value.shape().str());
    }
    nodes_.push_back(Node{std::move(value), {}, {}, "leaf"});
    return {this, nodes_.size() - 1};
}

Var Tape::record(std::string_view op, DenseArray value, std::vector<Var> inputs,
                 BackwardRule rule)
{
    if (!value.all_finite()) {
        throw NonFiniteError(std::string(op) + ": non-finite output of shape "
                             + value.shape().str());
    }
    if (!recording_) {
        inputs.clear();
        rule = nullptr;
    }
    nodes_.push_back(Node{std::move(value), std::move(inputs), std::move(rule), op});
    return {this, nodes_.size() - 1};
}

std::vector<Var> Tape::grad(const Var& loss, std::span<const Var> wrt, bool create_graph)
{
    if (!loss.valid() || &loss.tape() != this) {
        throw Error(ErrorKind::invalid_argument, "backward: loss is not on this tape");
    }
    if (loss.shape() != Shape{1, 1}) {
        throw ShapeError("backward: loss must be a scalar, got " + loss.shape().str());
    }
    const std::size_t end = loss.id() + 1;

    // needs[id]: node id is a target or depends on one. Only those nodes
    // carry gradients, which also stops propagation above the targets.
    std::vector<char> needs(end, 0);
    std::size_t first = end;
    for (const Var& w : wrt) {
        if (!w.valid() || &w.tape() != this) {
            throw Error(ErrorKind::invalid_argument, "backward: parameter is not on this tape");
        }
        if (w.id() < end) {
            needs[w.id()] = 1;
            first = std::min(first, w.id());
        }
    }
    for (std::size_t id = first; id < end; ++id) {
        if (needs[id] != 0) {
            continue;
        }
        for (const Var& in : nodes_[id].inputs) {
            if (needs[in.id()] != 0) {
                needs[id] = 1;
                break;
            }
        }
    }

    std::optional<NoGradGuard> guard;
    if (!create_graph) {
        guard.emplace(*this);
    }

    std::vector<Var> grads(end);
    grads[loss.id()] = leaf(DenseArray::scalar(1.0));
    for (std::size_t id = end; id-- > first;) {
        if (needs[id] == 0 || !grads[id].valid()) {
            continue;
        }
        // deque: references stay valid while the rule appends nodes.
        const Node& node = nodes_[id];
        if (node.inputs.empty() || !node.rule) {
            continue;
        }
        std::array<bool, 4> flags{};
        const std::size_t n = node.inputs.size();
        bool any = false;
        for (std::size_t k = 0; k < n; ++k) {
            flags.at(k) = needs[node.inputs[k].id()] != 0;
            any = any || flags.at(k);
        }
        if (!any) {
            continue;
        }
        const std::vector<Var> in_grads =
            node.rule(Var(this, id), grads[id], node.inputs, std::span<const bool>(flags.data(), n));
        for (std::size_t k = 0; k < n; ++k) {
            if (!flags.at(k) || !in_grads[k].valid()) {
                continue;
            }
            Var& slot = grads[node.inputs[k].id()];
            slot = slot.valid() ? add(slot, in_grads[k]) : in_grads[k];
        }
    }

    std::vector<Var> out;
    out.reserve(wrt.size());
    for (const Var& w : wrt) {
        if (w.id() < end && grads[w.id()].valid()) {
            out.push_back(grads[w.id()]);
        } else {
            out.push_back(leaf(DenseArray(w.shape(), 0.0)));
        }
    }
    return out;
}

} // namespace hyperadapt::ad

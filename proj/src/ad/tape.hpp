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

#include "ad/dense_array.hpp"

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace hyperadapt::ad {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid as long as its tape lives.
class Var {
public:
    Var() = default;

    [[nodiscard]] bool valid() const noexcept { return tape_ != nullptr; }
    [[nodiscard]] Tape& tape() const noexcept { return *tape_; }
    [[nodiscard]] std::size_t id() const noexcept { return id_; }
    [[nodiscard]] const DenseArray& value() const;
    [[nodiscard]] Shape shape() const { return value().shape(); }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Local gradient rule of one primitive. Receives the node's output, the
// incoming gradient and the operands, and returns one gradient per operand
// (an invalid Var where `needs[k]` is false). Rules are written with tape
// operations, so with graph recording enabled the returned gradients are
// themselves differentiable.
using BackwardRule = std::function<std::vector<Var>(
    const Var& out, const Var& grad_out, std::span<const Var> inputs,
    std::span<const bool> needs)>;

// Define-by-run tape. Nodes are appended in evaluation order, so node ids are
// a topological order of the graph and backward passes simply walk ids in
// reverse. A tape is not thread-safe; independent tapes share nothing.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // A leaf: parameter or data. Gradients can be requested for any node.
    Var leaf(DenseArray value);
    Var constant(DenseArray value) { return leaf(std::move(value)); }

    // Records the output of a primitive. When recording is off (inside a
    // NoGradGuard) the node is stored without operands and acts as a constant.
    Var record(std::string_view op, DenseArray value, std::vector<Var> inputs, BackwardRule rule);

    // Gradients of the scalar `loss` with respect to each of `wrt`.
    //
    // With `create_graph` the gradient computation is itself recorded so a
    // loss built from the result can be differentiated again. A node from
    // which `loss` is not reachable receives an all-zero gradient; that is
    // not an error.
    std::vector<Var> grad(const Var& loss, std::span<const Var> wrt, bool create_graph);

    [[nodiscard]] bool recording() const noexcept { return recording_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] const DenseArray& value(std::size_t id) const { return nodes_.at(id).value; }
    [[nodiscard]] std::string_view op(std::size_t id) const { return nodes_.at(id).op; }

    // Disables recording for its lifetime.
    class NoGradGuard {
    public:
        explicit NoGradGuard(Tape& tape) : tape_(tape), previous_(tape.recording_)
        {
            tape_.recording_ = false;
        }
        ~NoGradGuard() { tape_.recording_ = previous_; }
        NoGradGuard(const NoGradGuard&) = delete;
        NoGradGuard& operator=(const NoGradGuard&) = delete;

    private:
        Tape& tape_;
        bool previous_;
    };

private:
    struct Node {
        DenseArray value;
        std::vector<Var> inputs;
        BackwardRule rule;
        std::string_view op;
    };

    std::deque<Node> nodes_;
    bool recording_ = true;
};

} // namespace hyperadapt::ad

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

// Primitive table shared by the autodiff tests and the acceptance suite.

#include "ad/ops.hpp"
#include "common/rng.hpp"
#include "fd_oracle.hpp"

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hyperadapt::testing {

inline ad::DenseArray random_array(Rng& rng, ad::Shape shape, double lo = -2.0, double hi = 2.0)
{
    ad::DenseArray a(shape);
    for (double& v : a.values()) {
        v = rng.uniform(lo, hi);
    }
    return a;
}

struct PrimitiveCase {
    std::string name;
    std::vector<ad::Shape> shapes;
    std::function<ad::Var(std::span<const ad::Var>)> build;
    // Maps a raw uniform(-2, 2) draw into the primitive's domain.
    std::function<double(double)> domain = [](double v) { return v; };
};

inline std::vector<PrimitiveCase> primitive_cases()
{
    const auto away_from_zero = [](double v) { return v >= 0.0 ? v + 0.5 : v - 0.5; };
    return {
        {"matmul", {{3, 4}, {4, 2}}, [](auto in) { return matmul(in[0], in[1]); }},
        {"matmul_nt", {{3, 4}, {2, 4}}, [](auto in) { return matmul_nt(in[0], in[1]); }},
        {"matmul_tn", {{4, 3}, {4, 2}}, [](auto in) { return matmul_tn(in[0], in[1]); }},
        {"transpose", {{2, 5}}, [](auto in) { return transpose(in[0]); }},
        {"add_bias", {{3, 4}, {1, 4}}, [](auto in) { return add_bias(in[0], in[1]); }},
        {"relu", {{3, 5}}, [](auto in) { return relu(in[0]); },
         [](double v) { return std::abs(v) < 1e-3 ? v + 0.01 : v; }},
        {"clamp", {{3, 5}}, [](auto in) { return clamp(in[0], -1.0, 1.0); },
         [](double v) { return std::abs(std::abs(v) - 1.0) < 1e-3 ? v * 0.9 : v; }},
        {"add", {{2, 3}, {2, 3}}, [](auto in) { return add(in[0], in[1]); }},
        {"sub", {{2, 3}, {2, 3}}, [](auto in) { return sub(in[0], in[1]); }},
        {"mul", {{2, 3}, {2, 3}}, [](auto in) { return mul(in[0], in[1]); }},
        {"div", {{2, 3}, {2, 3}}, [](auto in) { return div(in[0], in[1]); }, away_from_zero},
        {"scalar_mul", {{1, 1}, {2, 3}}, [](auto in) { return scalar_mul(in[0], in[1]); }},
        {"concat", {{2, 3}, {2, 2}}, [](auto in) { return concat(in[0], in[1]); }},
        {"slice", {{3, 4}}, [](auto in) { return slice(in[0], 2, 7); }},
        {"slice_cols", {{3, 4}}, [](auto in) { return slice_cols(in[0], 1, 2); }},
        {"reshape", {{3, 4}}, [](auto in) { return reshape(in[0], {2, 6}); }},
        {"sum", {{3, 4}}, [](auto in) { return sum(in[0]); }},
        {"mean", {{3, 4}}, [](auto in) { return mean(in[0]); }},
        {"sum_rows", {{3, 4}}, [](auto in) { return sum_rows(in[0]); }},
        {"broadcast_rows", {{1, 4}}, [](auto in) { return broadcast_rows(in[0], 3); }},
        {"square", {{3, 4}}, [](auto in) { return square(in[0]); }},
        {"exp", {{3, 4}}, [](auto in) { return exp(in[0]); }},
        {"tanh", {{3, 4}}, [](auto in) { return tanh(in[0]); }},
        {"log", {{3, 4}}, [](auto in) { return log(in[0]); },
         [](double v) { return std::abs(v) + 0.1; }},
        {"reparameterize", {{2, 3}, {2, 3}, {2, 3}},
         [](auto in) { return reparameterize(in[0], in[1], in[2]); }},
    };
}

// loss = sum(weights * primitive(inputs)) for fixed random weights.
inline double primitive_loss(const PrimitiveCase& c, std::span<const double> flat, const ad::DenseArray& weights,
                             std::vector<double>* grads)
{
    ad::Tape tape;
    std::vector<ad::Var> inputs;
    std::size_t offset = 0;
    for (const ad::Shape s : c.shapes) {
        const auto part = flat.subspan(offset, s.size());
        inputs.push_back(tape.leaf(ad::DenseArray(s, std::vector<double>(part.begin(), part.end()))));
        offset += s.size();
    }
    const ad::Var out = c.build(inputs);
    const ad::Var loss = sum(mul(out, tape.constant(weights)));
    if (grads != nullptr) {
        grads->clear();
        for (const ad::Var& g : tape.grad(loss, inputs, false)) {
            const auto v = g.value().values();
            grads->insert(grads->end(), v.begin(), v.end());
        }
    }
    return loss.value().item();
}

// Max relative error between the tape gradient and central differences on
// one random instance of `c`.
inline double primitive_fd_error(const PrimitiveCase& c, Rng& rng)
{
    std::vector<double> flat;
    std::vector<ad::DenseArray> parts;
    for (const ad::Shape s : c.shapes) {
        ad::DenseArray a(s);
        for (double& v : a.values()) {
            v = c.domain(rng.uniform(-2.0, 2.0));
        }
        flat.insert(flat.end(), a.values().begin(), a.values().end());
        parts.push_back(std::move(a));
    }
    ad::Tape probe;
    std::vector<ad::Var> probe_in;
    for (const auto& a : parts) {
        probe_in.push_back(probe.leaf(a));
    }
    const ad::DenseArray weights = random_array(rng, c.build(probe_in).shape());

    std::vector<double> analytic;
    primitive_loss(c, flat, weights, &analytic);
    const auto numeric =
        central_difference([&](std::span<const double> x) { return primitive_loss(c, x, weights, nullptr); }, flat);
    return max_relative_error(analytic, numeric);
}

} // namespace hyperadapt::testing

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

namespace hyperadapt::ad {

// Differentiable primitives. Every operand must live on the same tape; shape
// violations throw ShapeError naming the primitive and the shapes involved,
// and a non-finite result throws NonFiniteError.

// a(n x k) * b(k x m). The transposed forms avoid materializing transposes.
Var matmul(const Var& a, const Var& b);
Var matmul_nt(const Var& a, const Var& b); // a * b^T
Var matmul_tn(const Var& a, const Var& b); // a^T * b
Var transpose(const Var& a);

// x(n x m) + bias(1 x m) broadcast over rows.
Var add_bias(const Var& x, const Var& bias);

// Gradient at exactly 0 is 0.
Var relu(const Var& x);
// Clamps to [lo, hi]; gradient is 1 inside the closed interval, 0 outside.
Var clamp(const Var& x, double lo, double hi);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var neg(const Var& a);
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);
// s(1x1) * x, with gradients flowing to both.
Var scalar_mul(const Var& s, const Var& x);

Var square(const Var& x);
Var exp(const Var& x);
Var log(const Var& x);
Var tanh(const Var& x);

// Reductions to 1x1.
Var sum(const Var& x);
Var mean(const Var& x);
// Column sums: (n x m) -> (1 x m).
Var sum_rows(const Var& x);

// x(1 x m) repeated n times -> (n x m).
Var broadcast_rows(const Var& x, std::size_t n);
// s(1 x 1) filled into `shape`.
Var broadcast_scalar(const Var& s, Shape shape);

// Column-wise concatenation [a | b]; both must have the same row count.
Var concat(const Var& a, const Var& b);
Var slice_cols(const Var& x, std::size_t begin, std::size_t count);
Var pad_cols(const Var& x, std::size_t begin, std::size_t total_cols);

// Flat (row-major) slice returned as a 1 x count row, and its adjoint.
Var slice(const Var& x, std::size_t offset, std::size_t count);
Var pad(const Var& x, std::size_t offset, Shape shape);
Var reshape(const Var& x, Shape shape);

// mu + exp(logvar / 2) * eps, with eps supplied by the caller.
Var reparameterize(const Var& mu, const Var& logvar, const Var& eps);

} // namespace hyperadapt::ad

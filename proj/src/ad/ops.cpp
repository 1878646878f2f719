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

#include "ad/ops.hpp"

#include "common/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

namespace hyperadapt::ad {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

Tape& tape_of(std::string_view op, const Var& a)
{
    if (!a.valid()) {
        throw Error(ErrorKind::invalid_argument, std::string(op) + ": invalid operand");
    }
    return a.tape();
}

Tape& tape_of(std::string_view op, const Var& a, const Var& b)
{
    Tape& t = tape_of(op, a);
    if (!b.valid() || &b.tape() != &t) {
        throw Error(ErrorKind::invalid_argument,
                    std::string(op) + ": operands live on different tapes");
    }
    return t;
}

[[noreturn]] void shape_mismatch(std::string_view op, Shape a, Shape b)
{
    throw ShapeError(std::string(op) + ": shape mismatch " + a.str() + " vs " + b.str());
}

void require_same_shape(std::string_view op, const Var& a, const Var& b)
{
    if (a.shape() != b.shape()) {
        shape_mismatch(op, a.shape(), b.shape());
    }
}

void require_scalar(std::string_view op, const Var& s)
{
    if (s.shape() != Shape{1, 1}) {
        throw ShapeError(std::string(op) + ": expected a 1x1 operand, got " + s.shape().str());
    }
}

template <typename F>
DenseArray map_values(const DenseArray& x, F f)
{
    DenseArray out(x.shape());
    const auto in = x.values();
    auto o = out.values();
    for (std::size_t i = 0; i < in.size(); ++i) {
        o[i] = f(in[i]);
    }
    return out;
}

template <typename F>
DenseArray zip_values(const DenseArray& a, const DenseArray& b, F f)
{
    DenseArray out(a.shape());
    const auto x = a.values();
    const auto y = b.values();
    auto o = out.values();
    for (std::size_t i = 0; i < x.size(); ++i) {
        o[i] = f(x[i], y[i]);
    }
    return out;
}

Var matmul_impl(const Var& a, const Var& b, bool ta, bool tb)
{
    constexpr std::string_view op = "matmul";
    Tape& tape = tape_of(op, a, b);
    const Shape sa = a.shape();
    const Shape sb = b.shape();
    const std::size_t n = ta ? sa.cols : sa.rows;
    const std::size_t k = ta ? sa.rows : sa.cols;
    const std::size_t kb = tb ? sb.cols : sb.rows;
    const std::size_t m = tb ? sb.rows : sb.cols;
    if (k != kb) {
        shape_mismatch(op, sa, sb);
    }

    DenseArray out({n, m});
    const ConstMap ma(a.value().data(), static_cast<Eigen::Index>(sa.rows),
                      static_cast<Eigen::Index>(sa.cols));
    const ConstMap mb(b.value().data(), static_cast<Eigen::Index>(sb.rows),
                      static_cast<Eigen::Index>(sb.cols));
    MutMap mo(out.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    if (!ta && !tb) {
        mo.noalias() = ma * mb;
    } else if (!ta && tb) {
        mo.noalias() = ma * mb.transpose();
    } else if (ta && !tb) {
        mo.noalias() = ma.transpose() * mb;
    } else {
        mo.noalias() = ma.transpose() * mb.transpose();
    }

    auto rule = [ta, tb](const Var&, const Var& g, std::span<const Var> in,
                         std::span<const bool> needs) -> std::vector<Var> {
        const Var& x = in[0];
        const Var& y = in[1];
        std::vector<Var> out(2);
        if (!ta && !tb) {
            if (needs[0]) out[0] = matmul_impl(g, y, false, true);
            if (needs[1]) out[1] = matmul_impl(x, g, true, false);
        } else if (!ta && tb) {
            if (needs[0]) out[0] = matmul_impl(g, y, false, false);
            if (needs[1]) out[1] = matmul_impl(g, x, true, false);
        } else if (ta && !tb) {
            if (needs[0]) out[0] = matmul_impl(y, g, false, true);
            if (needs[1]) out[1] = matmul_impl(x, g, false, false);
        } else {
            if (needs[0]) out[0] = matmul_impl(y, g, true, true);
            if (needs[1]) out[1] = matmul_impl(g, x, true, true);
        }
        return out;
    };
    return tape.record(op, std::move(out), {a, b}, rule);
}

} // namespace

Var matmul(const Var& a, const Var& b) { return matmul_impl(a, b, false, false); }
Var matmul_nt(const Var& a, const Var& b) { return matmul_impl(a, b, false, true); }
Var matmul_tn(const Var& a, const Var& b) { return matmul_impl(a, b, true, false); }

Var transpose(const Var& a)
{
    Tape& tape = tape_of("transpose", a);
    const DenseArray& x = a.value();
    DenseArray out({x.cols(), x.rows()});
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
            out(c, r) = x(r, c);
        }
    }
    return tape.record("transpose", std::move(out), {a},
                       [](const Var&, const Var& g, std::span<const Var>, std::span<const bool>) {
                           return std::vector<Var>{transpose(g)};
                       });
}

Var add_bias(const Var& x, const Var& bias)
{
    constexpr std::string_view op = "add_bias";
    Tape& tape = tape_of(op, x, bias);
    const Shape sx = x.shape();
    if (bias.shape() != Shape{1, sx.cols}) {
        shape_mismatch(op, sx, bias.shape());
    }
    DenseArray out = x.value();
    const auto b = bias.value().values();
    for (std::size_t r = 0; r < sx.rows; ++r) {
        for (std::size_t c = 0; c < sx.cols; ++c) {
            out(r, c) += b[c];
        }
    }
    return tape.record(op, std::move(out), {x, bias},
                       [](const Var&, const Var& g, std::span<const Var>,
                          std::span<const bool> needs) {
                           std::vector<Var> out(2);
                           if (needs[0]) out[0] = g;
                           if (needs[1]) out[1] = sum_rows(g);
                           return out;
                       });
}

Var relu(const Var& x)
{
    Tape& tape = tape_of("relu", x);
    DenseArray out = map_values(x.value(), [](double v) { return v > 0.0 ? v : 0.0; });
    return tape.record("relu", std::move(out), {x},
                       [](const Var&, const Var& g, std::span<const Var> in,
                          std::span<const bool>) {
                           DenseArray mask =
                               map_values(in[0].value(), [](double v) { return v > 0.0 ? 1.0 : 0.0; });
                           return std::vector<Var>{mul(g, g.tape().constant(std::move(mask)))};
                       });
}

Var clamp(const Var& x, double lo, double hi)
{
    Tape& tape = tape_of("clamp", x);
    DenseArray out = map_values(x.value(), [lo, hi](double v) { return std::clamp(v, lo, hi); });
    return tape.record("clamp", std::move(out), {x},
                       [lo, hi](const Var&, const Var& g, std::span<const Var> in,
                                std::span<const bool>) {
                           DenseArray mask = map_values(in[0].value(), [lo, hi](double v) {
                               return (v >= lo && v <= hi) ? 1.0 : 0.0;
                           });
                           return std::vector<Var>{mul(g, g.tape().constant(std::move(mask)))};
                       });
}

Var add(const Var& a, const Var& b)
{
    Tape& tape = tape_of("add", a, b);
    require_same_shape("add", a, b);
    return tape.record("add", zip_values(a.value(), b.value(), std::plus<>{}), {a, b},
                       [](const Var&, const Var& g, std::span<const Var>,
                          std::span<const bool> needs) {
                           std::vector<Var> out(2);
                           if (needs[0]) out[0] = g;
                           if (needs[1]) out[1] = g;
                           return out;
                       });
}

Var sub(const Var& a, const Var& b)
{
    Tape& tape = tape_of("sub", a, b);
    require_same_shape("sub", a, b);
    return tape.record("sub", zip_values(a.value(), b.value(), std::minus<>{}), {a, b},
                       [](const Var&, const Var& g, std::span<const Var>,
                          std::span<const bool> needs) {
                           std::vector<Var> out(2);
                           if (needs[0]) out[0] = g;
                           if (needs[1]) out[1] = neg(g);
                           return out;
                       });
}

Var mul(const Var& a, const Var& b)
{
    Tape& tape = tape_of("mul", a, b);
    require_same_shape("mul", a, b);
    return tape.record("mul", zip_values(a.value(), b.value(), std::multiplies<>{}), {a, b},
                       [](const Var&, const Var& g, std::span<const Var> in,
                          std::span<const bool> needs) {
                           std::vector<Var> out(2);
                           if (needs[0]) out[0] = mul(g, in[1]);
                           if (needs[1]) out[1] = mul(g, in[0]);
                           return out;
                       });
}

Var div(const Var& a, const Var& b)
{
    Tape& tape = tape_of("div", a, b);
    require_same_shape("div", a, b);
    return tape.record("div", zip_values(a.value(), b.value(), std::divides<>{}), {a, b},
                       [](const Var& out, const Var& g, std::span<const Var> in,
                          std::span<const bool> needs) {
                           std::vector<Var> grads(2);
                           const Var g_over_b = div(g, in[1]);
                           if (needs[0]) grads[0] = g_over_b;
                           if (needs[1]) grads[1] = neg(mul(g_over_b, out));
                           return grads;
                       });
}

Var neg(const Var& a)
{
    Tape& tape = tape_of("neg", a);
    return tape.record("neg", map_values(a.value(), std::negate<>{}), {a},
                       [](const Var&, const Var& g, std::span<const Var>, std::span<const bool>) {
                           return std::vector<Var>{neg(g)};
                       });
}

Var scale(const Var& a, double c)
{
    Tape& tape = tape_of("scale", a);
    return tape.record("scale", map_values(a.value(), [c](double v) { return c * v; }), {a},
                       [c](const Var&, const Var& g, std::span<const Var>, std::span<const bool>) {
                           return std::vector<Var>{scale(g, c)};
                       });
}

Var add_scalar(const Var& a, double c)
{
    Tape& tape = tape_of("add_scalar", a);
    return tape.record("add_scalar", map_values(a.value(), [c](double v) { return v + c; }), {a},
                       [](const Var&, const Var& g, std::span<const Var>, std::span<const bool>) {
                           return std::vector<Var>{g};
                       });
}

Var scalar_mul(const Var& s, const Var& x)
{
    Tape& tape = tape_of("scalar_mul", s, x);
    require_scalar("scalar_mul", s);
    const double c = s.value().item();
    return tape.record("scalar_mul", map_values(x.value(), [c](double v) { return c * v; }),
                       {s, x},
                       [](const Var&, const Var& g, std::span<const Var> in,
                          std::span<const bool> needs) {
                           std::vector<Var> out(2);
                           if (needs[0]) out[0] = sum(mul(g, in[1]));
                           if (needs[1]) out[1] = scalar_mul(in[0], g);
                           return out;
                       });
}

Var square(const Var& x)
{
    Tape& tape = tape_of("square", x);
    return tape.record("square", map_values(x.value(), [](double v) { return v * v; }), {x},
                       [](const Var&, const Var& g, std::span<const Var> in,
                          std::span<const bool>) {
                           return std::vector<Var>{scale(mul(g, in[0]), 2.0)};
                       });
}

Var exp(const Var& x)
{
    Tape& tape = tape_of("exp", x);
    return tape.record("exp", map_values(x.value(), [](double v) { return std::exp(v); }), {x},
                       [](const Var& out, const Var& g, std::span<const Var>,
                          std::span<const bool>) { return std::vector<Var>{mul(g, out)}; });
}

Var tanh(const Var& x)
{
    Tape& tape = tape_of("tanh", x);
    return tape.record("tanh", map_values(x.value(), [](double v) { return std::tanh(v); }), {x},
                       [](const Var& out, const Var& g, std::span<const Var>, std::span<const bool>) {
                           return std::vector<Var>{mul(g, add_scalar(neg(square(out)), 1.0))};
                       });
}

Var log(const Var& x)
{
    Tape& tape = tape_of("log", x);
    return tape.record("log", map_values(x.value(), [](double v) { return std::log(v); }), {x},
                       [](const Var&, const Var& g, std::span<const Var> in,
                          std::span<const bool>) { return std::vector<Var>{div(g, in[0])}; });
}

Var sum(const Var& x)
{
    Tape& tape = tape_of("sum", x);
    double total = 0.0;
    for (const double v : x.value().values()) {
        total += v;
    }
    return tape.record("sum", DenseArray::scalar(total), {x},
                       [](const Var&, const Var& g, std::span<const Var> in,
                          std::span<const bool>) {
                           return std::vector<Var>{broadcast_scalar(g, in[0].shape())};
                       });
}

Var mean(const Var& x)
{
    Tape& tape = tape_of("mean", x);
    const std::size_t n = x.value().size();
    if (n == 0) {
        throw ShapeError("mean: empty operand");
    }
    double total = 0.0;
    for (const double v : x.value().values()) {
        total += v;
    }
    const double inv = 1.0 / static_cast<double>(n);
    return tape.record("mean", DenseArray::scalar(total * inv), {x},
                       [inv](const Var&, const Var& g, std::span<const Var> in,
                             std::span<const bool>) {
                           return std::vector<Var>{broadcast_scalar(scale(g, inv), in[0].shape())};
                       });
}

Var sum_rows(const Var& x)
{
    Tape& tape = tape_of("sum_rows", x);
    const DenseArray& v = x.value();
    DenseArray out({1, v.cols()});
    for (std::size_t r = 0; r < v.rows(); ++r) {
        for (std::size_t c = 0; c < v.cols(); ++c) {
            out[c] += v(r, c);
        }
    }
    return tape.record("sum_rows", std::move(out), {x},
                       [](const Var&, const Var& g, std::span<const Var> in,
                          std::span<const bool>) {
                           return std::vector<Var>{broadcast_rows(g, in[0].shape().rows)};
                       });
}

Var broadcast_rows(const Var& x, std::size_t n)
{
    Tape& tape = tape_of("broadcast_rows", x);
    if (x.shape().rows != 1) {
        throw ShapeError("broadcast_rows: expected a row, got " + x.shape().str());
    }
    const auto src = x.value().values();
    DenseArray out({n, src.size()});
    for (std::size_t r = 0; r < n; ++r) {
        std::copy(src.begin(), src.end(), out.values().begin() + static_cast<std::ptrdiff_t>(r * src.size()));
    }
    return tape.record("broadcast_rows", std::move(out), {x},
                       [](const Var&, const Var& g, std::span<const Var>, std::span<const bool>) {
                           return std::vector<Var>{sum_rows(g)};
                       });
}

Var broadcast_scalar(const Var& s, Shape shape)
{
    Tape& tape = tape_of("broadcast_scalar", s);
    require_scalar("broadcast_scalar", s);
    return tape.record("broadcast_scalar", DenseArray(shape, s.value().item()), {s},
                       [](const Var&, const Var& g, std::span<const Var>, std::span<const bool>) {
                           return std::vector<Var>{sum(g)};
                       });
}

Var concat(const Var& a, const Var& b)
{
    Tape& tape = tape_of("concat", a, b);
    const Shape sa = a.shape();
    const Shape sb = b.shape();
    if (sa.rows != sb.rows) {
        shape_mismatch("concat", sa, sb);
    }
    DenseArray out({sa.rows, sa.cols + sb.cols});
    for (std::size_t r = 0; r < sa.rows; ++r) {
        for (std::size_t c = 0; c < sa.cols; ++c) {
            out(r, c) = a.value()(r, c);
        }
        for (std::size_t c = 0; c < sb.cols; ++c) {
            out(r, sa.cols + c) = b.value()(r, c);
        }
    }
    const std::size_t ca = sa.cols;
    const std::size_t cb = sb.cols;
    return tape.record("concat", std::move(out), {a, b},
                       [ca, cb](const Var&, const Var& g, std::span<const Var>,
                                std::span<const bool> needs) {
                           std::vector<Var> out(2);
                           if (needs[0]) out[0] = slice_cols(g, 0, ca);
                           if (needs[1]) out[1] = slice_cols(g, ca, cb);
                           return out;
                       });
}

Var slice_cols(const Var& x, std::size_t begin, std::size_t count)
{
    Tape& tape = tape_of("slice_cols", x);
    const Shape s = x.shape();
    if (begin + count > s.cols) {
        throw ShapeError("slice_cols: columns [" + std::to_string(begin) + ", "
                         + std::to_string(begin + count) + ") out of range for " + s.str());
    }
    DenseArray out({s.rows, count});
    for (std::size_t r = 0; r < s.rows; ++r) {
        for (std::size_t c = 0; c < count; ++c) {
            out(r, c) = x.value()(r, begin + c);
        }
    }
    const std::size_t total = s.cols;
    return tape.record("slice_cols", std::move(out), {x},
                       [begin, total](const Var&, const Var& g, std::span<const Var>,
                                      std::span<const bool>) {
                           return std::vector<Var>{pad_cols(g, begin, total)};
                       });
}

Var pad_cols(const Var& x, std::size_t begin, std::size_t total_cols)
{
    Tape& tape = tape_of("pad_cols", x);
    const Shape s = x.shape();
    if (begin + s.cols > total_cols) {
        throw ShapeError("pad_cols: " + s.str() + " at column " + std::to_string(begin)
                         + " exceeds " + std::to_string(total_cols) + " columns");
    }
    DenseArray out({s.rows, total_cols});
    for (std::size_t r = 0; r < s.rows; ++r) {
        for (std::size_t c = 0; c < s.cols; ++c) {
            out(r, begin + c) = x.value()(r, c);
        }
    }
    const std::size_t count = s.cols;
    return tape.record("pad_cols", std::move(out), {x},
                       [begin, count](const Var&, const Var& g, std::span<const Var>,
                                      std::span<const bool>) {
                           return std::vector<Var>{slice_cols(g, begin, count)};
                       });
}

Var slice(const Var& x, std::size_t offset, std::size_t count)
{
    Tape& tape = tape_of("slice", x);
    const Shape s = x.shape();
    if (offset + count > s.size()) {
        throw ShapeError("slice: range [" + std::to_string(offset) + ", "
                         + std::to_string(offset + count) + ") out of range for " + s.str());
    }
    const auto src = x.value().values().subspan(offset, count);
    return tape.record("slice", DenseArray::row(src), {x},
                       [offset, s](const Var&, const Var& g, std::span<const Var>,
                                   std::span<const bool>) {
                           return std::vector<Var>{pad(g, offset, s)};
                       });
}

Var pad(const Var& x, std::size_t offset, Shape shape)
{
    Tape& tape = tape_of("pad", x);
    const Shape s = x.shape();
    if (offset + s.size() > shape.size()) {
        throw ShapeError("pad: " + s.str() + " at offset " + std::to_string(offset)
                         + " does not fit " + shape.str());
    }
    DenseArray out(shape);
    const auto src = x.value().values();
    std::copy(src.begin(), src.end(), out.values().begin() + static_cast<std::ptrdiff_t>(offset));
    return tape.record("pad", std::move(out), {x},
                       [offset, s](const Var&, const Var& g, std::span<const Var>,
                                   std::span<const bool>) {
                           return std::vector<Var>{reshape(slice(g, offset, s.size()), s)};
                       });
}

Var reshape(const Var& x, Shape shape)
{
    Tape& tape = tape_of("reshape", x);
    const Shape s = x.shape();
    if (s.size() != shape.size()) {
        shape_mismatch("reshape", s, shape);
    }
    const auto src = x.value().values();
    DenseArray out(shape, std::vector<double>(src.begin(), src.end()));
    return tape.record("reshape", std::move(out), {x},
                       [s](const Var&, const Var& g, std::span<const Var>, std::span<const bool>) {
                           return std::vector<Var>{reshape(g, s)};
                       });
}

Var reparameterize(const Var& mu, const Var& logvar, const Var& eps)
{
    constexpr std::string_view op = "reparameterize";
    Tape& tape = tape_of(op, mu, logvar);
    tape_of(op, mu, eps);
    require_same_shape(op, mu, logvar);
    require_same_shape(op, mu, eps);
    DenseArray out(mu.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = mu.value()[i] + std::exp(0.5 * logvar.value()[i]) * eps.value()[i];
    }
    return tape.record(op, std::move(out), {mu, logvar, eps},
                       [](const Var&, const Var& g, std::span<const Var> in,
                          std::span<const bool> needs) {
                           std::vector<Var> out(3);
                           const Var& lv = in[1];
                           const Var& e = in[2];
                           if (needs[0]) out[0] = g;
                           if (needs[1] || needs[2]) {
                               const Var sigma = exp(scale(lv, 0.5));
                               if (needs[1]) out[1] = scale(mul(mul(g, sigma), e), 0.5);
                               if (needs[2]) out[2] = mul(g, sigma);
                           }
                           return out;
                       });
}

} // namespace hyperadapt::ad

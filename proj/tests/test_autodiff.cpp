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

#include "ad/adam.hpp"
#include "ad/ops.hpp"
#include "ad/param_layout.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "ad_cases.hpp"
#include "fd_oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>

using namespace hyperadapt;
using namespace hyperadapt::ad;
using hyperadapt::testing::central_difference;
using hyperadapt::testing::max_relative_error;
using hyperadapt::testing::primitive_cases;
using hyperadapt::testing::primitive_loss;
using hyperadapt::testing::PrimitiveCase;
using hyperadapt::testing::random_array;

TEST_CASE("forward primitives on hand-computable inputs")
{
    Tape tape;
    const Var x = tape.leaf(DenseArray::row({-1.0, 0.0, 2.0}));
    CHECK(relu(x).value() == DenseArray::row({0.0, 0.0, 2.0}));

    const Var a = tape.leaf(DenseArray({1, 2}, {1.0, 2.0}));
    const Var b = tape.leaf(DenseArray({2, 1}, {3.0, 4.0}));
    CHECK(matmul(a, b).value().item() == 11.0);

    const Var mu = tape.leaf(DenseArray::scalar(0.0));
    const Var lv = tape.leaf(DenseArray::scalar(0.0));
    const Var eps = tape.leaf(DenseArray::scalar(0.5));
    CHECK(reparameterize(mu, lv, eps).value().item() == 0.5);
}

TEST_CASE("shape mismatch names the primitive and both shapes")
{
    Tape tape;
    const Var a = tape.leaf(DenseArray({2, 3}));
    const Var b = tape.leaf(DenseArray({2, 3}));
    try {
        (void)matmul(a, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string what = e.what();
        CHECK(what.find("matmul") != std::string::npos);
        CHECK(what.find("(2x3)") != std::string::npos);
    }
    CHECK_THROWS_AS((void)add_bias(a, tape.leaf(DenseArray({1, 2}))), ShapeError);
    CHECK_THROWS_AS((void)tape.grad(a, std::vector<Var>{a}, false), ShapeError);
}

TEST_CASE("non-finite forward values are errors")
{
    Tape tape;
    const Var x = tape.leaf(DenseArray::row({-1.0}));
    CHECK_THROWS_AS((void)log(x), NonFiniteError);
    CHECK_THROWS_AS((void)tape.leaf(DenseArray::row({NAN})), NonFiniteError);
}

TEST_CASE("first and second derivatives of polynomials")
{
    Tape tape;
    const Var x = tape.leaf(DenseArray::scalar(3.0));
    const Var y = sum(square(x));
    CHECK(tape.grad(y, std::vector<Var>{x}, false)[0].value().item() == doctest::Approx(6.0));

    const Var x2 = tape.leaf(DenseArray::scalar(2.0));
    const Var cube = mul(square(x2), x2);
    const Var dx = tape.grad(cube, std::vector<Var>{x2}, true)[0];
    CHECK(dx.value().item() == doctest::Approx(12.0));
    const Var ddx = tape.grad(dx, std::vector<Var>{x2}, false)[0];
    CHECK(ddx.value().item() == doctest::Approx(12.0));
}

TEST_CASE("unreachable parameters receive zero gradients")
{
    Tape tape;
    const Var used = tape.leaf(DenseArray::row({1.0, 2.0}));
    const Var unused = tape.leaf(DenseArray::row({5.0, 6.0, 7.0}));
    const Var loss = sum(square(used));
    const auto grads = tape.grad(loss, std::vector<Var>{used, unused}, false);
    CHECK(grads[1].shape() == Shape{1, 3});
    for (double v : grads[1].value().values()) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("every primitive matches central differences")
{
    Rng rng(2024);
    int instances = 0;
    for (const PrimitiveCase& c : primitive_cases()) {
        CAPTURE(c.name);
        for (int trial = 0; trial < 6; ++trial) {
            CHECK(hyperadapt::testing::primitive_fd_error(c, rng) <= 1e-5);
            ++instances;
        }
    }
    CHECK(instances >= 100);
}

TEST_CASE("gradient through a gradient step matches finite differences")
{
    // f(w) = ||g(w - lr * grad h(w))||^2 with h, g small ReLU networks of the
    // same weight vector w (2-4-3 network, 27 parameters).
    Rng rng(7);
    const std::vector<std::size_t> widths{2, 4, 3};
    const ParamLayout layout = ParamLayout::dense_stack(widths);
    const DenseArray inner_x = random_array(rng, {5, 2});
    const DenseArray inner_y = random_array(rng, {5, 3});
    const DenseArray outer_x = random_array(rng, {4, 2});
    const double lr = 0.05;

    const auto net = [&](const std::vector<Var>& p, const Var& x) {
        return add_bias(matmul(relu(add_bias(matmul(x, p[0]), p[1])), p[2]), p[3]);
    };
    const auto objective = [&](std::span<const double> w, std::vector<double>* grads) {
        Tape tape;
        const Var flat = tape.leaf(DenseArray::row(w));
        const Var h = sum(square(sub(net(layout.bind(flat), tape.constant(inner_x)),
                                     tape.constant(inner_y))));
        const Var g = tape.grad(h, std::vector<Var>{flat}, true)[0];
        const Var adapted = sub(flat, scale(g, lr));
        const Var f = sum(square(net(layout.bind(adapted), tape.constant(outer_x))));
        if (grads != nullptr) {
            const auto v = tape.grad(f, std::vector<Var>{flat}, false)[0].value().values();
            grads->assign(v.begin(), v.end());
        }
        return f.value().item();
    };

    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> w(layout.total());
        for (double& v : w) {
            v = rng.uniform(-1.0, 1.0);
        }
        std::vector<double> analytic;
        objective(w, &analytic);
        const auto numeric =
            central_difference([&](std::span<const double> x) { return objective(x, nullptr); }, w);
        CHECK(max_relative_error(analytic, numeric) <= 1e-4);
    }
}

TEST_CASE("identical tapes give bit-identical values and gradients")
{
    const auto run = [] {
        Rng rng(99);
        Tape tape;
        const Var w = tape.leaf(random_array(rng, {3, 3}));
        const Var x = tape.leaf(random_array(rng, {4, 3}));
        const Var loss = mean(exp(scale(relu(matmul(x, w)), 0.3)));
        auto g = tape.grad(loss, std::vector<Var>{w}, false)[0].value();
        return std::make_pair(loss.value(), g);
    };
    CHECK(run() == run());
}

TEST_CASE("param layout binds slices and routes gradients")
{
    const std::vector<std::size_t> widths{6, 8, 98};
    const ParamLayout layout = ParamLayout::dense_stack(widths);
    CHECK(layout.total() == 938);
    CHECK(layout.at("W1").offset == 0);
    CHECK(layout.at("b1").offset == 48);
    CHECK(layout.at("W2").offset == 56);
    CHECK(layout.at("b2").offset == 840);

    Tape tape;
    const Var flat = tape.leaf(DenseArray({1, 938}, 0.5));
    const auto parts = layout.bind(flat);
    const Var loss = sum(parts[2]);
    const auto g = tape.grad(loss, std::vector<Var>{flat}, false)[0].value();
    CHECK(g[55] == 0.0);
    CHECK(g[56] == 1.0);
    CHECK(g[839] == 1.0);
    CHECK(g[840] == 0.0);
    CHECK_THROWS_AS((void)layout.bind(tape.leaf(DenseArray({1, 937}))), ShapeError);
}

TEST_CASE("adam with zero gradient leaves parameters unchanged")
{
    std::vector<double> p{1.0, -2.0};
    AdamState state(2);
    state.m = {0.5, -0.5};
    state.v = {0.25, 0.25};
    state.step = 3;
    const std::vector<double> zeros(2, 0.0);
    adam_step(p, zeros, state, {});
    // m decays but is not zero yet, so only the moments are checked here.
    CHECK(std::abs(state.m[0]) < 0.5);
    CHECK(std::abs(state.v[0]) < 0.25);

    std::vector<double> q{1.0, -2.0};
    AdamState fresh(2);
    adam_step(q, zeros, fresh, {});
    CHECK(q == std::vector<double>{1.0, -2.0});
    CHECK(fresh.m == std::vector<double>{0.0, 0.0});
}

TEST_CASE("adam first step moves each coordinate by about lr against the gradient")
{
    std::vector<double> p{0.0, 0.0, 0.0};
    AdamState state(3);
    const std::vector<double> g{3.0, -0.01, 100.0};
    adam_step(p, g, state, {.lr = 1e-3});
    CHECK(p[0] == doctest::Approx(-1e-3).epsilon(1e-4));
    CHECK(p[1] == doctest::Approx(1e-3).epsilon(1e-4));
    CHECK(p[2] == doctest::Approx(-1e-3).epsilon(1e-4));
}

TEST_CASE("adam converges on a convex quadratic")
{
    // f(x) = sum_i a_i (x_i - c_i)^2, minimum 0 at x = c.
    const std::vector<double> a{1.0, 3.0, 0.5};
    const std::vector<double> c{0.4, -0.7, 0.2};
    std::vector<double> x{0.0, 0.0, 0.0};
    AdamState state(3);
    std::vector<double> g(3);
    for (int step = 0; step < 200; ++step) {
        for (std::size_t i = 0; i < 3; ++i) {
            g[i] = 2.0 * a[i] * (x[i] - c[i]);
        }
        adam_step(x, g, state, {.lr = 0.05});
    }
    double f = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        f += a[i] * (x[i] - c[i]) * (x[i] - c[i]);
    }
    CHECK(f < 1e-6);
}

TEST_CASE("adam rejects non-finite gradients without touching state")
{
    std::vector<double> p{1.0, 2.0};
    AdamState state(2);
    const std::vector<double> g{0.1, INFINITY};
    CHECK_THROWS_AS(adam_step(p, g, state, {}), NonFiniteError);
    CHECK(p == std::vector<double>{1.0, 2.0});
    CHECK(state.step == 0);
    CHECK_THROWS_AS(adam_step(p, std::vector<double>{1.0}, state, {}), ShapeError);
}

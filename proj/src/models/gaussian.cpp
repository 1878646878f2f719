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

#include "models/gaussian.hpp"

#include "ad/ops.hpp"
#include "common/error.hpp"

#include <cmath>
#include <numbers>

namespace hyperadapt::models {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

} // namespace

double kl_divergence(const DiagonalGaussian& q, const DiagonalGaussian& p)
{
    if (q.dim() != p.dim() || q.logvar.size() != q.dim() || p.logvar.size() != p.dim()) {
        throw ShapeError("kl_divergence: dimension mismatch");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < q.dim(); ++i) {
        const double diff = q.mean[i] - p.mean[i];
        kl += 0.5 * (p.logvar[i] - q.logvar[i]
                     + (std::exp(q.logvar[i]) + diff * diff) / std::exp(p.logvar[i]) - 1.0);
    }
    return kl;
}

double kl_standard_normal(const DiagonalGaussian& q)
{
    DiagonalGaussian prior;
    prior.mean.assign(q.dim(), 0.0);
    prior.logvar.assign(q.dim(), 0.0);
    return kl_divergence(q, prior);
}

GaussianVar split_gaussian_head(const ad::Var& head)
{
    const std::size_t cols = head.shape().cols;
    if (cols == 0 || cols % 2 != 0) {
        throw ShapeError("gaussian head: expected an even column count, got " + head.shape().str());
    }
    const std::size_t d = cols / 2;
    static_assert(kLogVarMin == -kLogVarMax);
    const ad::Var raw = ad::slice_cols(head, d, d);
    return {ad::slice_cols(head, 0, d), ad::scale(ad::tanh(ad::scale(raw, 1.0 / kLogVarMax)), kLogVarMax)};
}

DiagonalGaussian row_gaussian(const GaussianVar& g, std::size_t row)
{
    const ad::DenseArray& m = g.mean.value();
    const ad::DenseArray& lv = g.logvar.value();
    DiagonalGaussian out;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        out.mean.push_back(m(row, c));
        out.logvar.push_back(lv(row, c));
    }
    return out;
}

ad::Var kl_standard_normal(const GaussianVar& q)
{
    const double n = static_cast<double>(q.mean.shape().size());
    const ad::Var terms = ad::sub(ad::add(ad::exp(q.logvar), ad::square(q.mean)), q.logvar);
    return ad::add_scalar(ad::scale(ad::sum(terms), 0.5), -0.5 * n);
}

ad::Var unit_gaussian_nll(const ad::Var& prediction, const ad::Var& target)
{
    const ad::Shape shape = prediction.shape();
    if (shape != target.shape()) {
        throw ShapeError("unit_gaussian_nll: shape mismatch " + shape.str() + " vs " + target.shape().str());
    }
    const double rows = static_cast<double>(shape.rows);
    const double cols = static_cast<double>(shape.cols);
    const ad::Var sq = ad::sum(ad::square(ad::sub(prediction, target)));
    return ad::add_scalar(ad::scale(sq, 0.5 / rows), 0.5 * cols * kLog2Pi);
}

ad::Var gaussian_nll(const GaussianVar& q, const ad::Var& target)
{
    const ad::Shape shape = q.mean.shape();
    if (shape != target.shape()) {
        throw ShapeError("gaussian_nll: shape mismatch " + shape.str() + " vs " + target.shape().str());
    }
    const double rows = static_cast<double>(shape.rows);
    const double cols = static_cast<double>(shape.cols);
    const ad::Var sq = ad::square(ad::sub(target, q.mean));
    const ad::Var terms = ad::add(q.logvar, ad::mul(sq, ad::exp(ad::neg(q.logvar))));
    return ad::add_scalar(ad::scale(ad::sum(terms), 0.5 / rows), 0.5 * cols * kLog2Pi);
}

} // namespace hyperadapt::models

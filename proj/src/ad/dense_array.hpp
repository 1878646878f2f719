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

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hyperadapt::ad {

// Row-major 2-D shape. Scalars are 1x1, vectors are 1xn rows.
struct Shape {
    std::size_t rows = 0;
    std::size_t cols = 0;

    [[nodiscard]] constexpr std::size_t size() const noexcept { return rows * cols; }
    constexpr bool operator==(const Shape&) const = default;
    [[nodiscard]] std::string str() const
    {
        return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
    }
};

class DenseArray {
public:
    DenseArray() = default;
    explicit DenseArray(Shape shape, double fill = 0.0)
        : shape_(shape), values_(shape.size(), fill)
    {}
    DenseArray(Shape shape, std::vector<double> values);

    static DenseArray scalar(double v) { return DenseArray({1, 1}, v); }
    static DenseArray row(std::vector<double> values)
    {
        const std::size_t n = values.size();
        return {{1, n}, std::move(values)};
    }
    static DenseArray row(std::span<const double> values)
    {
        return {{1, values.size()}, std::vector<double>(values.begin(), values.end())};
    }

    [[nodiscard]] Shape shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t rows() const noexcept { return shape_.rows; }
    [[nodiscard]] std::size_t cols() const noexcept { return shape_.cols; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] const double* data() const noexcept { return values_.data(); }
    [[nodiscard]] double* data() noexcept { return values_.data(); }

    double operator()(std::size_t r, std::size_t c) const { return values_[r * shape_.cols + c]; }
    double& operator()(std::size_t r, std::size_t c) { return values_[r * shape_.cols + c]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    // Value of a 1x1 array; throws ShapeError otherwise.
    [[nodiscard]] double item() const;
    [[nodiscard]] bool all_finite() const noexcept;

    bool operator==(const DenseArray&) const = default;

private:
    Shape shape_;
    std::vector<double> values_;
};

} // namespace hyperadapt::ad

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

#include <stdexcept>
#include <string>

namespace hyperadapt {

enum class ErrorKind {
    invalid_argument,
    shape,
    non_finite,
    unreachable_goal,
    missing_dependency,
    io,
    config,
};

// Base of every exception thrown by the library. The kind survives stage
// tagging so the C API can map it to a status code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind)
    {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& message)
        : Error(ErrorKind::shape, message)
    {}
};

class NonFiniteError : public Error {
public:
    explicit NonFiniteError(const std::string& message)
        : Error(ErrorKind::non_finite, message)
    {}
};

class UnreachableGoalError : public Error {
public:
    explicit UnreachableGoalError(const std::string& message)
        : Error(ErrorKind::unreachable_goal, message)
    {}
};

// Prefixes "[stage] " to a library error while keeping its kind.
[[noreturn]] inline void rethrow_tagged(const std::string& stage, const Error& e)
{
    throw Error(e.kind(), "[" + stage + "] " + e.what());
}

} // namespace hyperadapt

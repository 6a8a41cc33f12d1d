// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef NLSWIPT_TYPES_HPP
#define NLSWIPT_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlswipt
{

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

/// Machine-readable reason attached to every validation failure.
enum class ErrorCode
{
    EvenN,
    TooFewSubcarriers,
    BadLength,
    NonPositiveBandwidth,
    NegativeNoise,
    WindowTooSmall,
    InvalidDiode,
    DimensionMismatch,
    NegativeVariance,
    NonZeroMean,
    InfeasibleStart,
    InvalidArgument,
    MissingField,
};

const char *to_string(ErrorCode code);

/// Thrown on contract violations. `field()` names the offending input when known.
class Error : public std::invalid_argument
{
public:
    Error(ErrorCode code, const std::string &message, std::string field = {})
        : std::invalid_argument(message), code_(code), field_(std::move(field)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string &field() const noexcept { return field_; }

private:
    ErrorCode code_;
    std::string field_;
};

inline constexpr double kPi = 3.14159265358979323846;

} // namespace nlswipt

#endif

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

#include "nlswipt/types.hpp"

namespace nlswipt
{

const char *to_string(ErrorCode code)
{
    switch (code)
    {
    case ErrorCode::EvenN: return "EvenN";
    case ErrorCode::TooFewSubcarriers: return "TooFewSubcarriers";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::NonPositiveBandwidth: return "NonPositiveBandwidth";
    case ErrorCode::NegativeNoise: return "NegativeNoise";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::InvalidDiode: return "InvalidDiode";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeVariance: return "NegativeVariance";
    case ErrorCode::NonZeroMean: return "NonZeroMean";
    case ErrorCode::InfeasibleStart: return "InfeasibleStart";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingField: return "MissingField";
    }
    return "Unknown";
}

} // namespace nlswipt

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

#ifndef NLSWIPT_IO_HPP
#define NLSWIPT_IO_HPP

#include "nlswipt/mc_oracle.hpp"
#include "nlswipt/optimizer.hpp"
#include "nlswipt/rp_sweep.hpp"

#include <json.hpp>

#include <span>
#include <string>

namespace nlswipt
{

using Json = nlohmann::ordered_json;

/// Shortest decimal form that round-trips at 17 significant digits; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double x);

Json to_json(const GaussianInput &input);

/// Reads {mu_r, mu_i, p_r, p_i}; missing arrays throw MissingField, unequal lengths DimensionMismatch.
GaussianInput input_from_json(const Json &j);

Json to_json(const KKTReport &report);
Json to_json(const DiodeModel &diode);
Json to_json(const CurveMetadata &meta);
Json to_json(const RPPoint &point);
Json to_json(const RPCurve &curve);
Json to_json(const MomentReport &report);

/// Header: family,lambda2,rate,p_dc,mu_r0..mu_r{N-1},mu_i0..,p_r0..,p_i0..,p_dc_linear,converged. Filtered points only.
std::string curves_csv(std::span<const RPCurve> curves);

/// {"curves": [...]} with metadata, filtered points and the raw solves.
std::string curves_json(std::span<const RPCurve> curves);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json &j);

} // namespace nlswipt

#endif

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

#include "nlswipt/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace nlswipt
{

namespace
{

Json number(double x)
{
    if (std::isfinite(x))
        return x;
    return format_double(x);
}

RVec read_array(const Json &j, const char *key)
{
    if (!j.contains(key))
        throw Error(ErrorCode::MissingField, std::string("solution is missing '") + key + "'", key);
    const Json &arr = j.at(key);
    if (!arr.is_array())
        throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must be an array", key);
    RVec out;
    for (const auto &v : arr)
    {
        if (!v.is_number())
            throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must hold numbers", key);
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Json to_json(const GaussianInput &input)
{
    return Json{{"mu_r", input.mu_r}, {"mu_i", input.mu_i}, {"p_r", input.p_r}, {"p_i", input.p_i}};
}

GaussianInput input_from_json(const Json &j)
{
    if (!j.is_object())
        throw Error(ErrorCode::InvalidArgument, "solution must be a JSON object", "input");
    GaussianInput in;
    in.mu_r = read_array(j, "mu_r");
    in.mu_i = read_array(j, "mu_i");
    in.p_r = read_array(j, "p_r");
    in.p_i = read_array(j, "p_i");
    const std::size_t n = in.p_r.size();
    if (in.mu_r.size() != n || in.mu_i.size() != n || in.p_i.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "solution arrays differ in length", "input");
    return in;
}

Json to_json(const KKTReport &r)
{
    return Json{{"lambda1", number(r.lambda1)},
                {"lambda2", number(r.lambda2)},
                {"stationarity_residual", number(r.stationarity_residual)},
                {"feasibility_residual", number(r.feasibility_residual)},
                {"complementarity_residual", number(r.complementarity_residual)},
                {"delivered_power_gap", number(r.delivered_power_gap)},
                {"pass", r.pass}};
}

Json to_json(const DiodeModel &d) { return Json{{"k2", d.k2}, {"k4", d.k4}}; }

Json to_json(const CurveMetadata &m)
{
    char hash[19];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(m.channel_hash));
    return Json{{"channel_hash", hash}, {"n", m.n},          {"p_a", m.p_a},
                {"sigma_w2", m.sigma_w2}, {"diode", to_json(m.diode)}, {"seed", m.seed}};
}

Json to_json(const RPPoint &p)
{
    Json j{{"family", to_string(p.family)},
           {"lambda2", number(p.lambda2)},
           {"rate", number(p.rate)},
           {"p_dc", number(p.p_dc)},
           {"p_dc_linear", number(p.p_dc_linear)},
           {"converged", p.converged},
           {"input", to_json(p.input)}};
    if (!p.error.empty())
        j["error"] = p.error;
    return j;
}

Json to_json(const RPCurve &c)
{
    Json points = Json::array(), raw = Json::array();
    for (const auto &p : c.points)
        points.push_back(to_json(p));
    for (const auto &p : c.raw)
        raw.push_back(to_json(p));
    return Json{{"family", to_string(c.family)}, {"metadata", to_json(c.metadata)}, {"points", points}, {"raw", raw}};
}

Json to_json(const MomentReport &r)
{
    Json rows = Json::array();
    for (const auto &row : r.rows)
        rows.push_back(Json{{"subcarrier", row.subcarrier},
                            {"quantity", row.quantity},
                            {"closure", number(row.closure)},
                            {"sample", number(row.sample)},
                            {"stderr", number(row.std_error)},
                            {"pass", row.pass}});
    return Json{{"rows", rows}, {"sample_var_r", r.sample_var_r}, {"sample_var_i", r.sample_var_i}, {"pass", r.pass}};
}

std::string curves_csv(std::span<const RPCurve> curves)
{
    std::size_t n = 0;
    for (const auto &c : curves)
        for (const auto &p : c.points)
            n = std::max(n, p.input.size());

    std::ostringstream out;
    out << "family,lambda2,rate,p_dc";
    for (const char *name : {"mu_r", "mu_i", "p_r", "p_i"})
        for (std::size_t l = 0; l < n; ++l)
            out << ',' << name << l;
    out << ",p_dc_linear,converged\n";
    for (const auto &c : curves)
        for (const auto &p : c.points)
        {
            out << to_string(p.family) << ',' << format_double(p.lambda2) << ',' << format_double(p.rate) << ','
                << format_double(p.p_dc);
            for (const RVec *v : {&p.input.mu_r, &p.input.mu_i, &p.input.p_r, &p.input.p_i})
                for (std::size_t l = 0; l < n; ++l)
                    out << ',' << (l < v->size() ? format_double((*v)[l]) : std::string());
            out << ',' << format_double(p.p_dc_linear) << ',' << (p.converged ? "true" : "false") << '\n';
        }
    return out.str();
}

std::string curves_json(std::span<const RPCurve> curves)
{
    Json arr = Json::array();
    for (const auto &c : curves)
        arr.push_back(to_json(c));
    return dump(Json{{"curves", arr}});
}

std::string dump(const Json &j) { return j.dump(2) + "\n"; }

} // namespace nlswipt

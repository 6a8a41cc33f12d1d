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

#include "nlswipt/optimizer.hpp"

#include "local_solver.hpp"
#include "nlswipt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace nlswipt
{

using detail::Layout;
using detail::LocalOptions;
using detail::LocalResult;
using detail::Problem;

namespace
{

void check_sizes(const PowerCoeffs &coeffs, const FreqChannel &ch)
{
    if (ch.size() != static_cast<std::size_t>(coeffs.n))
        throw Error(ErrorCode::DimensionMismatch, "channel and coefficient lengths differ");
}

// Index of the best value; ties keep the lowest index so the choice is schedule-independent.
std::size_t best_index(const std::vector<LocalResult> &runs)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < runs.size(); ++i)
        if (runs[i].value > runs[best].value)
            best = i;
    return best;
}

KKTReport solver_report(const LocalResult &r, double lambda2, double feas, const OptConfig &cfg)
{
    KKTReport k;
    k.lambda1 = r.stationarity.nu;
    k.lambda2 = lambda2;
    k.stationarity_residual = r.stationarity.residual;
    k.feasibility_residual = feas;
    k.pass = k.stationarity_residual <= cfg.tol_grad && feas <= cfg.tol_feas;
    return k;
}

double budget_gap(const GaussianInput &in, double p_a) { return std::abs(in.total_power() - p_a) / std::max(1.0, p_a); }

} // namespace

void validate(const OptConfig &cfg)
{
    if (!(cfg.p_a > 0.0))
        throw Error(ErrorCode::InvalidArgument, "power budget must be positive", "optimizer.P_a");
    if (!(cfg.lambda2 >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "lambda2 must be nonnegative", "optimizer.lambda2");
    if (cfg.multistart_wpt < 1 || cfg.multistart_zm < 1)
        throw Error(ErrorCode::InvalidArgument, "multistart counts must be at least 1", "optimizer.multistart");
    if (cfg.max_iters < 1)
        throw Error(ErrorCode::InvalidArgument, "max_iters must be at least 1", "optimizer.max_iters");
    if (!(cfg.tol_grad > 0.0) || !(cfg.tol_feas > 0.0))
        throw Error(ErrorCode::InvalidArgument, "tolerances must be positive", "optimizer.tol_grad");
}

const char *to_string(SolveStatus status)
{
    return status == SolveStatus::Converged ? "Converged" : "MaxItersExceeded";
}

WaterfillSolution waterfill_solution(const FreqChannel &ch, double p_a)
{
    if (!(p_a > 0.0))
        throw Error(ErrorCode::InvalidArgument, "power budget must be positive", "power.P_a");
    const RateConstants rc = rate_constants(ch);
    const std::size_t n = ch.size();

    RVec inv(n, std::numeric_limits<double>::infinity());
    double inv_min = inv[0];
    for (std::size_t l = 0; l < n; ++l)
    {
        if (rc.a[l] > 0.0)
            inv[l] = 1.0 / rc.a[l];
        inv_min = std::min(inv_min, inv[l]);
    }
    if (!std::isfinite(inv_min))
        throw Error(ErrorCode::InvalidArgument, "every subcarrier has zero gain", "channel");

    // Each subcarrier carries 2 (level - 1/a_l)^+ in total.
    auto used = [&](double level) {
        double s = 0.0;
        for (double v : inv)
            s += 2.0 * std::max(0.0, level - v);
        return s;
    };
    double lo = inv_min, hi = inv_min + 0.5 * p_a;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i)
    {
        const double mid = 0.5 * (lo + hi);
        (used(mid) < p_a ? lo : hi) = mid;
    }

    // Closed form on the active set removes the bisection error.
    double level = 0.5 * (lo + hi);
    for (int pass = 0; pass < 4; ++pass)
    {
        double sum_inv = 0.0;
        int active = 0;
        for (double v : inv)
        {
            if (v < level)
            {
                sum_inv += v;
                ++active;
            }
        }
        const double refined = (0.5 * p_a + sum_inv) / active;
        if (refined == level)
            break;
        level = refined;
    }

    WaterfillSolution sol;
    RVec p(n);
    for (std::size_t l = 0; l < n; ++l)
        p[l] = std::max(0.0, level - inv[l]);
    sol.input = GaussianInput::zero_mean(p, p);
    sol.level = level;
    sol.lambda1 = rc.c1 / level;
    return sol;
}

GaussianInput waterfill(const FreqChannel &ch, double p_a) { return waterfill_solution(ch, p_a).input; }

WptResult optimize_wpt(const PowerCoeffs &coeffs, const OptConfig &cfg)
{
    validate(cfg);
    const Problem pb(Layout::Wpt, coeffs, nullptr, 1.0, cfg.p_a);
    const std::size_t m = static_cast<std::size_t>(cfg.multistart_wpt);
    std::vector<LocalResult> runs(m);
    parallel_for(m, [&](std::size_t i) {
        CounterRng rng = named_stream(cfg.seed, "wpt/restart/" + std::to_string(i));
        std::normal_distribution<double> nd(0.0, 1.0);
        RVec z(pb.dim());
        for (double &v : z)
            v = nd(rng);
        runs[i] = detail::local_solve(pb, std::move(z), {cfg.max_iters, cfg.tol_grad});
    });

    const std::size_t best = best_index(runs);
    const GaussianInput in = pb.to_input(runs[best].z);
    WptResult out;
    out.mu = in.means();
    out.p_dc = delivered_power_wpt(out.mu, coeffs);
    out.stationarity = runs[best].stationarity.residual;
    out.best_restart = static_cast<int>(best);
    out.status = runs[best].converged ? SolveStatus::Converged : SolveStatus::MaxItersExceeded;
    return out;
}

SwiptResult optimize_swipt_nzm(const PowerCoeffs &coeffs, const FreqChannel &ch, const OptConfig &cfg,
                               const GaussianInput &warm_start, MeanFamily family)
{
    validate(cfg);
    check_sizes(coeffs, ch);
    if (warm_start.size() != ch.size())
        throw Error(ErrorCode::DimensionMismatch, "warm start length differs from the channel");
    try
    {
        validate(warm_start);
    }
    catch (const Error &e)
    {
        throw Error(ErrorCode::InfeasibleStart, std::string("warm start: ") + e.what());
    }
    if (budget_gap(warm_start, cfg.p_a) > 1e-6)
        throw Error(ErrorCode::InfeasibleStart, "warm start misses the power budget");

    const RateConstants rc = rate_constants(ch);
    const Problem pb(family == MeanFamily::Symmetric ? Layout::Symmetric : Layout::Asymmetric, coeffs, &rc,
                     cfg.lambda2, cfg.p_a);
    const LocalResult r = detail::local_solve(pb, pb.from_input(warm_start), {cfg.max_iters, cfg.tol_grad});

    SwiptResult out;
    out.input = pb.to_input(r.z);
    out.rate = rate(out.input, rc);
    out.p_dc = delivered_power(out.input, coeffs);
    out.objective = out.rate + cfg.lambda2 * out.p_dc;
    out.iterations = r.iterations;
    out.status = r.converged ? SolveStatus::Converged : SolveStatus::MaxItersExceeded;
    if (family == MeanFamily::Asymmetric)
        out.kkt = kkt_residuals_nzm(out.input, r.stationarity.nu, cfg.lambda2, coeffs, ch, cfg.p_a, cfg.tol_grad,
                                    cfg.tol_feas);
    else
        out.kkt = solver_report(r, cfg.lambda2, budget_gap(out.input, cfg.p_a), cfg);
    return out;
}

namespace
{

SwiptResult finish_zero_mean(const Problem &pb, const LocalResult &r, int restart, const PowerCoeffs &coeffs,
                             const FreqChannel &ch, const RateConstants &rc, const OptConfig &cfg)
{
    SwiptResult out;
    out.input = pb.to_input(r.z);
    // Real and imaginary parts are interchangeable at zero mean; prefer loading the real part.
    for (std::size_t l = 0; l < out.input.size(); ++l)
        if (out.input.p_i[l] > out.input.p_r[l])
            std::swap(out.input.p_r[l], out.input.p_i[l]);
    out.rate = rate(out.input, rc);
    out.p_dc = delivered_power(out.input, coeffs);
    out.objective = out.rate + cfg.lambda2 * out.p_dc;
    out.iterations = r.iterations;
    out.best_restart = restart;
    out.status = r.converged ? SolveStatus::Converged : SolveStatus::MaxItersExceeded;
    out.kkt = kkt_residuals_zm(out.input, r.stationarity.nu, cfg.lambda2, coeffs, ch, cfg.p_a, cfg.tol_grad,
                               cfg.tol_feas);
    return out;
}

} // namespace

SwiptResult optimize_swipt_zm(const PowerCoeffs &coeffs, const FreqChannel &ch, const OptConfig &cfg)
{
    validate(cfg);
    check_sizes(coeffs, ch);
    const RateConstants rc = rate_constants(ch);
    const Problem pb(Layout::ZeroMean, coeffs, &rc, cfg.lambda2, cfg.p_a);
    const GaussianInput wf = waterfill(ch, cfg.p_a);

    // Restart 0 starts from waterfilling; the rest from random points of the budget simplex.
    const std::size_t m = static_cast<std::size_t>(cfg.multistart_zm);
    std::vector<LocalResult> runs(m);
    parallel_for(m, [&](std::size_t i) {
        RVec z;
        if (i == 0)
            z = pb.from_input(wf);
        else
        {
            CounterRng rng = named_stream(cfg.seed, "zm/restart/" + std::to_string(i));
            std::exponential_distribution<double> ex(1.0);
            z.resize(pb.dim());
            for (double &v : z)
                v = ex(rng);
        }
        runs[i] = detail::local_solve(pb, std::move(z), {cfg.max_iters, cfg.tol_grad});
    });
    const std::size_t best = best_index(runs);
    return finish_zero_mean(pb, runs[best], static_cast<int>(best), coeffs, ch, rc, cfg);
}

SwiptResult optimize_swipt_zm_from(const PowerCoeffs &coeffs, const FreqChannel &ch, const OptConfig &cfg,
                                   const GaussianInput &start)
{
    validate(cfg);
    check_sizes(coeffs, ch);
    if (start.size() != ch.size())
        throw Error(ErrorCode::DimensionMismatch, "start length differs from the channel");
    const RateConstants rc = rate_constants(ch);
    const Problem pb(Layout::ZeroMean, coeffs, &rc, cfg.lambda2, cfg.p_a);
    const LocalResult r = detail::local_solve(pb, pb.from_input(start), {cfg.max_iters, cfg.tol_grad});
    return finish_zero_mean(pb, r, 0, coeffs, ch, rc, cfg);
}

GaussianInput project_feasible(const GaussianInput &input, double p_a)
{
    if (!(p_a > 0.0))
        throw Error(ErrorCode::InvalidArgument, "power budget must be positive", "P_a");
    GaussianInput out = input;
    const std::size_t n = out.size();
    for (std::size_t l = 0; l < n; ++l)
    {
        out.p_r[l] = std::max(0.0, out.p_r[l]);
        out.p_i[l] = std::max(0.0, out.p_i[l]);
    }
    const double total = out.total_power();
    if (total == 0.0)
    {
        std::fill(out.p_r.begin(), out.p_r.end(), p_a / (2.0 * n));
        std::fill(out.p_i.begin(), out.p_i.end(), p_a / (2.0 * n));
    }
    else if (std::abs(total - p_a) > 4.0 * std::numeric_limits<double>::epsilon() * p_a)
    {
        const double k = p_a / total;
        for (std::size_t l = 0; l < n; ++l)
        {
            out.p_r[l] *= k;
            out.p_i[l] *= k;
        }
    }
    auto clip = [](double mu, double p) {
        if (mu * mu <= p)
            return mu;
        const double r = std::sqrt(p);
        return std::copysign(r * r <= p ? r : std::nextafter(r, 0.0), mu);
    };
    for (std::size_t l = 0; l < n; ++l)
    {
        out.mu_r[l] = clip(out.mu_r[l], out.p_r[l]);
        out.mu_i[l] = clip(out.mu_i[l], out.p_i[l]);
    }
    return out;
}

} // namespace nlswipt

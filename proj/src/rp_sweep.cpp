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

#include "nlswipt/rp_sweep.hpp"

#include "nlswipt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

namespace nlswipt
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_angle(double x) { return std::remainder(x, 2.0 * kPi); }

void require_odd(int n)
{
    if (n < 1 || n % 2 == 0)
        throw Error(ErrorCode::EvenN, "subcarrier count must be odd and positive, got " + std::to_string(n),
                    "sweep.n_list");
}

RPPoint make_point(Family family, double lambda2, const GaussianInput &input, const PowerCoeffs &coeffs,
                   const FreqChannel &ch)
{
    RPPoint pt;
    pt.family = family;
    pt.lambda2 = lambda2;
    pt.input = input;
    pt.rate = rate(input, ch);
    pt.p_dc = delivered_power(input, coeffs);
    pt.p_dc_linear = delivered_power_linear(input, ch);
    return pt;
}

bool symmetric_variances(const GaussianInput &in, double p_a)
{
    for (std::size_t l = 0; l < in.size(); ++l)
        if (std::abs(in.var_r(l) - in.var_i(l)) > 1e-12 * std::max(1.0, p_a))
            return false;
    return true;
}

/// Seeds at exactly this weight from other curves, in the order the curves were given.
std::vector<GaussianInput> seeds_at(std::span<const RPCurve> seeds, double lambda2, Family family, double p_a)
{
    std::vector<GaussianInput> out;
    for (const auto &curve : seeds)
        for (const auto &pt : curve.raw)
            if (pt.lambda2 == lambda2 && pt.error.empty() &&
                (family != Family::SNG || symmetric_variances(pt.input, p_a)))
                out.push_back(pt.input);
    return out;
}

using Solver = std::function<std::optional<SwiptResult>(double, const std::vector<GaussianInput> &, std::string &)>;

RPPoint solve_point(Family family, double lambda2, const std::vector<GaussianInput> &starts, const Solver &solve,
                    const PowerCoeffs &coeffs, const FreqChannel &ch)
{
    std::string error;
    const std::optional<SwiptResult> best = solve(lambda2, starts, error);
    if (!best)
    {
        RPPoint failed;
        failed.family = family;
        failed.lambda2 = lambda2;
        failed.input = starts.empty() ? GaussianInput::zeros(ch.size()) : starts.front();
        failed.converged = false;
        failed.error = error.empty() ? "no start produced a solution" : error;
        return failed;
    }
    RPPoint pt = make_point(family, lambda2, best->input, coeffs, ch);
    pt.converged = best->status == SolveStatus::Converged;
    return pt;
}

/**
 * Continuation down the schedule, then bisection of the weight wherever consecutive solutions
 * are further apart in rate than the refinement threshold. `raw` holds the finite-weight
 * points in descending weight order on return.
 */
void continuation(RPCurve &curve, const RVec &schedule, std::span<const RPCurve> seeds, const Solver &solve,
                  const PowerCoeffs &coeffs, const FreqChannel &ch, const SweepConfig &cfg, double p_a,
                  std::optional<GaussianInput> prev)
{
    std::vector<RPPoint> pts;
    for (double lambda2 : schedule)
    {
        std::vector<GaussianInput> starts;
        if (prev)
            starts.push_back(*prev);
        for (auto &s : seeds_at(seeds, lambda2, curve.family, p_a))
            starts.push_back(std::move(s));
        pts.push_back(solve_point(curve.family, lambda2, starts, solve, coeffs, ch));
        if (pts.back().error.empty())
            prev = pts.back().input;
    }

    double top = 0.0;
    for (const auto &pt : pts)
        top = std::max(top, pt.rate);
    const double gap = cfg.refine_rate_gap * top;
    for (int added = 0; added < cfg.max_refinements;)
    {
        bool changed = false;
        for (std::size_t i = 0; i + 1 < pts.size() && added < cfg.max_refinements; ++i)
        {
            const RPPoint &hi = pts[i], &lo = pts[i + 1];
            if (!hi.error.empty() || !lo.error.empty() || std::abs(hi.rate - lo.rate) <= gap ||
                !(lo.lambda2 > 0.0) || hi.lambda2 <= lo.lambda2 * (1.0 + cfg.refine_min_ratio))
                continue;
            const double mid = std::sqrt(hi.lambda2 * lo.lambda2);
            std::vector<GaussianInput> starts{hi.input, lo.input};
            RPPoint pt = solve_point(curve.family, mid, starts, solve, coeffs, ch);
            pts.insert(pts.begin() + static_cast<std::ptrdiff_t>(i) + 1, std::move(pt));
            ++added;
            ++i;
            changed = true;
        }
        if (!changed)
            break;
    }
    for (auto &pt : pts)
        curve.raw.push_back(std::move(pt));
}

/// Schedule extended by every finite weight the seed curves were solved at, descending, without repeats.
RVec merged_schedule(RVec schedule, std::span<const RPCurve> seeds)
{
    for (const auto &c : seeds)
        for (const auto &pt : c.raw)
            if (std::isfinite(pt.lambda2) && pt.family != Family::ZGL)
                schedule.push_back(pt.lambda2);
    std::sort(schedule.begin(), schedule.end(), std::greater<>());
    schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
    return schedule;
}

void sweep_nzm(RPCurve &curve, const PowerCoeffs &coeffs, const FreqChannel &ch, OptConfig opt,
               const SweepConfig &cfg, std::span<const RPCurve> seeds)
{
    const MeanFamily mf = curve.family == Family::SNG ? MeanFamily::Symmetric : MeanFamily::Asymmetric;
    const WptResult wpt = optimize_wpt(coeffs, opt);
    const GaussianInput start = GaussianInput::deterministic(wpt.mu);
    RPPoint anchor = make_point(curve.family, kInf, start, coeffs, ch);
    anchor.converged = wpt.status == SolveStatus::Converged;
    curve.raw.push_back(std::move(anchor));

    const Solver solve = [&](double lambda2, const std::vector<GaussianInput> &starts, std::string &error) {
        OptConfig o = opt;
        o.lambda2 = lambda2;
        std::optional<SwiptResult> best;
        for (const auto &s : starts)
        {
            try
            {
                SwiptResult r = optimize_swipt_nzm(coeffs, ch, o, s, mf);
                if (!best || r.objective > best->objective)
                    best = std::move(r);
            }
            catch (const Error &e)
            {
                if (error.empty())
                    error = e.what();
            }
        }
        return best;
    };
    continuation(curve, merged_schedule(lambda2_schedule(cfg), seeds), seeds, solve, coeffs, ch, cfg, opt.p_a,
                 start);
}

void sweep_zm(RPCurve &curve, const PowerCoeffs &coeffs, const FreqChannel &ch, OptConfig opt,
              const SweepConfig &cfg)
{
    const Solver solve = [&](double lambda2, const std::vector<GaussianInput> &starts, std::string &error) {
        OptConfig o = opt;
        o.lambda2 = lambda2;
        std::optional<SwiptResult> best;
        try
        {
            best = optimize_swipt_zm(coeffs, ch, o);
            for (const auto &s : starts)
            {
                SwiptResult r = optimize_swipt_zm_from(coeffs, ch, o, s);
                if (r.objective > best->objective)
                    best = std::move(r);
            }
        }
        catch (const Error &e)
        {
            error = e.what();
        }
        return best;
    };
    continuation(curve, lambda2_schedule(cfg), {}, solve, coeffs, ch, cfg, opt.p_a, std::nullopt);
}

void sweep_linear(RPCurve &curve, const PowerCoeffs &coeffs, const FreqChannel &ch, double p_a, int count)
{
    double g_max = 0.0;
    for (const auto &h : ch.h)
        g_max = std::max(g_max, std::norm(h));
    // Ratios approach 1/g_max geometrically, ending at 0 (waterfilling).
    for (int j = 0; j < count; ++j)
    {
        const double gap = j + 1 == count ? 1.0 : std::pow(1e-6, 1.0 - j / double(count - 1));
        const double ratio = (1.0 - gap) / g_max;
        double lambda1 = 0.0;
        const GaussianInput in = linear_weighted_allocation(ch, p_a, ratio, &lambda1);
        curve.raw.push_back(make_point(curve.family, ratio * lambda1, in, coeffs, ch));
    }
}

} // namespace

const char *to_string(Family family)
{
    switch (family)
    {
    case Family::ANG: return "ANG";
    case Family::SNG: return "SNG";
    case Family::ZG: return "ZG";
    case Family::ZGL: return "ZGL";
    }
    return "unknown";
}

Family family_from_string(std::string_view name)
{
    for (Family f : {Family::ANG, Family::SNG, Family::ZG, Family::ZGL})
        if (name == to_string(f))
            return f;
    throw Error(ErrorCode::InvalidArgument, "unknown input family '" + std::string(name) + "'", "sweep.families");
}

void validate(const SweepConfig &cfg)
{
    if (!(cfg.lambda2_min > 0.0) || !(cfg.lambda2_max >= cfg.lambda2_min) || !std::isfinite(cfg.lambda2_max))
        throw Error(ErrorCode::InvalidArgument, "weight schedule needs 0 < lambda2_min <= lambda2_max < inf",
                    "sweep.lambda2_min");
    if (cfg.lambda2_points < 1)
        throw Error(ErrorCode::InvalidArgument, "lambda2_points must be at least 1", "sweep.lambda2_points");
    if (!(cfg.refine_rate_gap > 0.0) || !(cfg.refine_min_ratio > 0.0) || cfg.max_refinements < 0)
        throw Error(ErrorCode::InvalidArgument, "refinement settings must be positive", "sweep.refine_rate_gap");
    if (cfg.zgl_points < 2)
        throw Error(ErrorCode::InvalidArgument, "zgl_points must be at least 2", "sweep.zgl_points");
}

RVec lambda2_schedule(const SweepConfig &cfg)
{
    validate(cfg);
    RVec out;
    const int m = cfg.lambda2_points;
    for (int i = 0; i < m; ++i)
    {
        const double t = m == 1 ? 0.0 : i / double(m - 1);
        out.push_back(cfg.lambda2_max * std::pow(cfg.lambda2_min / cfg.lambda2_max, t));
    }
    out.back() = cfg.lambda2_min;
    out.push_back(0.0);
    return out;
}

std::uint64_t channel_hash(const FreqChannel &ch)
{
    std::string bytes;
    auto put = [&](const void *p, std::size_t len) { bytes.append(static_cast<const char *>(p), len); };
    put(&ch.n, sizeof ch.n);
    put(&ch.f_w, sizeof ch.f_w);
    put(&ch.sigma_w2, sizeof ch.sigma_w2);
    put(ch.h.data(), ch.h.size() * sizeof(cplx));
    put(ch.h_u.data(), ch.h_u.size() * sizeof(cplx));
    return hash_name(bytes);
}

GaussianInput linear_weighted_allocation(const FreqChannel &ch, double p_a, double ratio, double *lambda1)
{
    if (!(p_a > 0.0))
        throw Error(ErrorCode::InvalidArgument, "power budget must be positive", "power.P_a");
    const RateConstants rc = rate_constants(ch);
    const std::size_t n = ch.size();
    double g_max = 0.0;
    for (const auto &h : ch.h)
        g_max = std::max(g_max, std::norm(h));
    if (!(g_max > 0.0))
        throw Error(ErrorCode::InvalidArgument, "every subcarrier has zero gain", "channel");
    if (!(ratio >= 0.0) || !(ratio * g_max < 1.0))
        throw Error(ErrorCode::InvalidArgument, "linear weight ratio must lie in [0, 1/max|h|^2)", "ratio");

    // Per component: (level * w_l - 1/a_l)^+ with w_l = 1 / (1 - ratio |h_l|^2).
    RVec w(n), inv(n, kInf);
    for (std::size_t l = 0; l < n; ++l)
    {
        w[l] = 1.0 / (1.0 - ratio * std::norm(ch.h[l]));
        if (rc.a[l] > 0.0)
            inv[l] = 1.0 / rc.a[l];
    }
    auto per_component = [&](double level, std::size_t l) { return std::max(0.0, level * w[l] - inv[l]); };
    auto used = [&](double level) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l)
            s += 2.0 * per_component(level, l);
        return s;
    };
    double lo = kInf;
    for (std::size_t l = 0; l < n; ++l)
        lo = std::min(lo, inv[l] / w[l]);
    double hi = lo + p_a;
    while (used(hi) < p_a)
        hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-16 * hi; ++i)
    {
        const double mid = 0.5 * (lo + hi);
        (used(mid) < p_a ? lo : hi) = mid;
    }
    double level = 0.5 * (lo + hi);
    // Exact level on the active set.
    for (int pass = 0; pass < 4; ++pass)
    {
        double sw = 0.0, si = 0.0;
        for (std::size_t l = 0; l < n; ++l)
            if (level * w[l] > inv[l])
            {
                sw += w[l];
                si += inv[l];
            }
        level = (0.5 * p_a + si) / sw;
    }

    RVec p(n);
    for (std::size_t l = 0; l < n; ++l)
        p[l] = per_component(level, l);
    if (lambda1)
        *lambda1 = rc.c1 / level;
    return GaussianInput::zero_mean(p, p);
}

std::vector<RPPoint> pareto_filter(std::vector<RPPoint> points)
{
    std::stable_sort(points.begin(), points.end(), [](const RPPoint &a, const RPPoint &b) {
        return a.p_dc != b.p_dc ? a.p_dc > b.p_dc : a.rate > b.rate;
    });
    std::vector<RPPoint> kept;
    double best_rate = -kInf;
    for (auto &pt : points)
        if (pt.rate > best_rate)
        {
            best_rate = pt.rate;
            kept.push_back(std::move(pt));
        }
    return kept;
}

std::vector<RPPoint> upper_envelope(const std::vector<RPPoint> &points)
{
    // Monotone chain over points ordered by increasing rate; keeps right turns only.
    std::vector<RPPoint> hull;
    for (const auto &pt : points)
    {
        while (hull.size() >= 2)
        {
            const RPPoint &a = hull[hull.size() - 2], &b = hull.back();
            const double cross = (b.rate - a.rate) * (pt.p_dc - a.p_dc) - (b.p_dc - a.p_dc) * (pt.rate - a.rate);
            if (cross < 0.0)
                break;
            hull.pop_back();
        }
        hull.push_back(pt);
    }
    return hull;
}

double interpolate_pdc(const RPCurve &curve, double r)
{
    if (curve.points.empty() || r > curve.points.back().rate)
        return std::numeric_limits<double>::quiet_NaN();
    const std::vector<RPPoint> pts = upper_envelope(curve.points);
    if (r <= pts.front().rate)
        return pts.front().p_dc;
    std::size_t i = 1;
    while (pts[i].rate < r)
        ++i;
    const RPPoint &a = pts[i - 1], &b = pts[i];
    const double t = (r - a.rate) / (b.rate - a.rate);
    return a.p_dc + t * (b.p_dc - a.p_dc);
}

RVec matched_rate_grid(std::span<const RPCurve> curves, int count)
{
    if (curves.empty() || count < 1)
        throw Error(ErrorCode::InvalidArgument, "matched-rate grid needs curves and a positive count", "count");
    double top = kInf;
    for (const auto &c : curves)
    {
        if (c.points.empty())
            throw Error(ErrorCode::InvalidArgument, "curve has no points", "curves");
        top = std::min(top, c.points.back().rate);
    }
    RVec grid;
    for (int i = 0; i < count; ++i)
        grid.push_back(top * (i + 1) / (count + 1));
    return grid;
}

RPCurve sweep_rp(Family family, const FreqChannel &ch, const DiodeModel &diode, double p_a, const SweepConfig &cfg,
                 std::span<const RPCurve> seeds)
{
    validate(cfg);
    OptConfig opt = cfg.opt;
    opt.p_a = p_a;
    validate(opt);
    rate_constants(ch); // noise check
    const PowerCoeffs coeffs = coefficients(ch, diode);

    RPCurve curve;
    curve.family = family;
    curve.metadata = {channel_hash(ch), ch.n, p_a, ch.sigma_w2, diode, opt.seed};
    switch (family)
    {
    case Family::ANG:
    case Family::SNG: sweep_nzm(curve, coeffs, ch, opt, cfg, seeds); break;
    case Family::ZG: sweep_zm(curve, coeffs, ch, opt, cfg); break;
    case Family::ZGL: sweep_linear(curve, coeffs, ch, p_a, cfg.zgl_points); break;
    }

    std::vector<RPPoint> usable;
    for (const auto &pt : curve.raw)
        if (pt.error.empty())
            usable.push_back(pt);
    curve.points = pareto_filter(std::move(usable));
    return curve;
}

std::vector<RPCurve> sweep_families(std::span<const Family> families, const FreqChannel &ch, const DiodeModel &diode,
                                    double p_a, const SweepConfig &cfg)
{
    const bool want_ang = std::find(families.begin(), families.end(), Family::ANG) != families.end();
    std::vector<Family> base;
    for (Family f : {Family::SNG, Family::ZG, Family::ZGL})
        if (std::find(families.begin(), families.end(), f) != families.end() ||
            (want_ang && f != Family::ZGL))
            base.push_back(f);

    std::vector<RPCurve> done(base.size());
    parallel_for(base.size(), [&](std::size_t i) { done[i] = sweep_rp(base[i], ch, diode, p_a, cfg); });

    std::optional<RPCurve> ang;
    if (want_ang)
        ang = sweep_rp(Family::ANG, ch, diode, p_a, cfg, done);

    std::vector<RPCurve> out;
    for (Family f : families)
    {
        if (f == Family::ANG)
            out.push_back(*ang);
        else
            out.push_back(done[std::find(base.begin(), base.end(), f) - base.begin()]);
    }
    return out;
}

std::vector<RPCurve> n_sweep_experiment(std::span<const int> n_list, const DiodeModel &diode, double p_a,
                                        const NSweepConfig &cfg)
{
    for (int n : n_list)
        require_odd(n);
    if (cfg.normalization == NSweepNormalization::EqualEnergy && !(cfg.reference_energy > 0.0))
        throw Error(ErrorCode::InvalidArgument, "reference energy must be positive", "sweep.reference_energy");

    std::vector<RPCurve> out(n_list.size());
    const Family ang[] = {Family::ANG};
    parallel_for(n_list.size(), [&](std::size_t i) {
        const int n = n_list[i];
        const double gain = cfg.normalization == NSweepNormalization::UnitGain ? 1.0
                                                                                : std::sqrt(cfg.reference_energy / n);
        out[i] = sweep_families(ang, flat_channel(n, cfg.sigma_w2, gain), diode, p_a, cfg.sweep).front();
    });
    return out;
}

double max_pdc(const RPCurve &curve)
{
    double best = -kInf;
    for (const auto &pt : curve.points)
        best = std::max(best, pt.p_dc);
    return best;
}

std::vector<PhaseReport> flat_channel_wpt_experiment(std::span<const int> n_list, double p_a, const DiodeModel &diode,
                                                     const OptConfig &cfg, double sigma_w2)
{
    for (int n : n_list)
        require_odd(n);
    OptConfig opt = cfg;
    opt.p_a = p_a;
    validate(opt);

    std::vector<PhaseReport> out;
    for (int n : n_list)
    {
        const WptResult w = optimize_wpt(coefficients(flat_channel(n, sigma_w2), diode), opt);
        PhaseReport rep;
        rep.n = n;
        rep.p_dc = w.p_dc;

        CVec ordered(n);
        for (int l = 0; l < n; ++l)
            ordered[centered_index(l, n) + (n - 1) / 2] = w.mu[l];
        const cplx centre = ordered[(n - 1) / 2];
        const cplx align = std::abs(centre) > 0.0 ? std::conj(centre) / std::abs(centre) : cplx(1.0, 0.0);
        rep.mu = w.mu;
        for (auto &m : rep.mu)
            m *= align;
        for (auto &m : ordered)
        {
            m *= align;
            rep.phases.push_back(std::arg(m));
        }

        cplx dir(0.0, 0.0);
        for (int i = 0; i + 1 < n; ++i)
        {
            const double g = wrap_angle(rep.phases[i + 1] - rep.phases[i]);
            rep.gaps.push_back(g);
            dir += std::polar(1.0, g);
        }
        rep.spacing = rep.gaps.empty() ? 0.0 : std::arg(dir);
        for (double g : rep.gaps)
            rep.max_deviation = std::max(rep.max_deviation, std::abs(wrap_angle(g - rep.spacing)));
        out.push_back(std::move(rep));
    }
    return out;
}

} // namespace nlswipt

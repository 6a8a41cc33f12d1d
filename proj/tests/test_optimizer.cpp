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
#include "nlswipt/rng.hpp"
#include "test_support.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

using namespace nlswipt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{

const DiodeModel kDiode{};

FreqChannel reference_channel() { return build_freq_channel(reference_channel_spec(0.1)); }

const GConstants kExampleConstants{0.0801, 2250.0, 0.0498, 4.9857, 1.6484, 6.2822};

double objective(const GaussianInput &in, const PowerCoeffs &c, const FreqChannel &ch, double lambda2)
{
    return rate(in, ch) + lambda2 * delivered_power(in, c);
}

std::size_t strongest(const FreqChannel &ch)
{
    std::size_t best = 0;
    for (std::size_t l = 1; l < ch.size(); ++l)
        if (std::norm(ch.h[l]) > std::norm(ch.h[best]))
            best = l;
    return best;
}

// Consecutive phase gaps of the means ordered by centered frequency index, deviation from their circular mean.
double phase_gap_spread(const CVec &mu)
{
    const int n = static_cast<int>(mu.size());
    CVec ordered(n);
    for (int l = 0; l < n; ++l)
        ordered[centered_index(l, n) + (n - 1) / 2] = mu[l];
    cplx mean_dir(0.0, 0.0);
    std::vector<cplx> gaps;
    for (int i = 0; i + 1 < n; ++i)
    {
        const cplx g = ordered[i + 1] * std::conj(ordered[i]);
        gaps.push_back(g / std::abs(g));
        mean_dir += gaps.back();
    }
    double spread = 0.0;
    for (const auto &g : gaps)
        spread = std::max(spread, std::abs(std::arg(g * std::conj(mean_dir))));
    return spread;
}

} // namespace

TEST_CASE("waterfilling on a flat channel splits power evenly")
{
    const GaussianInput in = waterfill(flat_channel(7, 0.1), 1.4);
    for (std::size_t l = 0; l < 7; ++l)
    {
        CHECK_THAT(in.p_r[l], WithinRel(0.1, 1e-14));
        CHECK_THAT(in.p_i[l], WithinRel(0.1, 1e-14));
    }
    CHECK(in.is_zero_mean());
}

TEST_CASE("waterfilling loads only the strong subchannel at low power")
{
    const FreqChannel ch = channel_from_coeffs({cplx(3.0, 0.0), cplx(0.1, 0.0)}, 0.1);
    const GaussianInput in = waterfill(ch, 0.01);
    CHECK_THAT(in.power(0), WithinRel(0.01, 1e-14));
    CHECK(in.power(1) == 0.0);
}

TEST_CASE("waterfilling meets the budget and equalizes the water level")
{
    const FreqChannel ch = reference_channel();
    const WaterfillSolution sol = waterfill_solution(ch, 1.0);
    CHECK_THAT(sol.input.total_power(), WithinAbs(1.0, 1e-10));
    const RateConstants rc = rate_constants(ch);
    CHECK_THAT(sol.lambda1, WithinRel(rc.c1 / sol.level, 1e-15));
    for (std::size_t l = 0; l < ch.size(); ++l)
    {
        if (sol.input.p_r[l] > 0.0)
            CHECK_THAT(sol.input.p_r[l] + 1.0 / rc.a[l], WithinRel(sol.level, 1e-14));
        else
            CHECK(1.0 / rc.a[l] >= sol.level);
        CHECK(sol.input.p_r[l] == sol.input.p_i[l]);
    }
}

TEST_CASE("waterfilling beats a fine grid on two subcarriers")
{
    const FreqChannel ch = channel_from_coeffs({cplx(1.0, 0.3), cplx(0.4, -0.2)}, 0.1);
    const double p_a = 0.2, step = 1e-3;
    const RateConstants rc = rate_constants(ch);
    const double best_wf = rate(waterfill(ch, p_a), rc);
    const int cells = static_cast<int>(std::lround(p_a / step));
    double best_grid = 0.0;
    for (int a = 0; a <= cells; ++a)
        for (int b = 0; a + b <= cells; ++b)
            for (int c = 0; a + b + c <= cells; ++c)
            {
                const int d = cells - a - b - c;
                const GaussianInput in = GaussianInput::zero_mean({a * step, c * step}, {b * step, d * step});
                best_grid = std::max(best_grid, rate(in, rc));
            }
    CHECK(best_wf >= best_grid);
    CHECK(best_wf - best_grid < 1e-4);
}

TEST_CASE("rate of the waterfilled reference input matches an extended-precision evaluation")
{
    using boost::multiprecision::cpp_bin_float_50;
    const FreqChannel ch = reference_channel();
    const GaussianInput in = waterfill(ch, 1.0);
    cpp_bin_float_50 total = 0;
    const cpp_bin_float_50 n = static_cast<int>(ch.size());
    for (std::size_t l = 0; l < ch.size(); ++l)
    {
        const cpp_bin_float_50 h2 = cpp_bin_float_50(ch.h[l].real()) * ch.h[l].real() +
                                    cpp_bin_float_50(ch.h[l].imag()) * ch.h[l].imag();
        const cpp_bin_float_50 a = 2 * n * h2 / (cpp_bin_float_50(ch.f_w) * cpp_bin_float_50(ch.sigma_w2));
        total += log(1 + a * cpp_bin_float_50(in.p_r[l])) + log(1 + a * cpp_bin_float_50(in.p_i[l]));
    }
    total *= cpp_bin_float_50(ch.f_w) / (2 * n) / log(cpp_bin_float_50(2));
    CHECK_THAT(rate(in, ch), WithinRel(total.convert_to<double>(), 1e-14));
}

TEST_CASE("deterministic optimum on a single subcarrier")
{
    const PowerCoeffs c = coefficients(flat_channel(1, 0.1, 1.2), kDiode);
    OptConfig cfg;
    cfg.p_a = 0.7;
    cfg.multistart_wpt = 5;
    const WptResult r = optimize_wpt(c, cfg);
    CHECK_THAT(std::norm(r.mu[0]), WithinRel(0.7, 1e-12));
    CHECK_THAT(r.p_dc, WithinRel(c.alpha[0] * 0.49 + c.beta[0] * 0.7 + c.eta, 1e-12));
}

TEST_CASE("deterministic optimum beats random search on the reference channel")
{
    const PowerCoeffs c = coefficients(reference_channel(), kDiode);
    OptConfig cfg;
    cfg.multistart_wpt = 1000;
    const WptResult r = optimize_wpt(c, cfg);
    CHECK(r.status == SolveStatus::Converged);
    CHECK(r.stationarity <= cfg.tol_grad);

    double total = 0.0;
    for (const auto &m : r.mu)
        total += std::norm(m);
    CHECK_THAT(total, WithinAbs(1.0, 1e-12));

    CounterRng rng = named_stream(5, "test/random-search");
    std::normal_distribution<double> nd(0.0, 1.0);
    double best = 0.0;
    for (int t = 0; t < 100000; ++t)
    {
        CVec mu(9);
        double s = 0.0;
        for (auto &m : mu)
        {
            m = cplx(nd(rng), nd(rng));
            s += std::norm(m);
        }
        for (auto &m : mu)
            m /= std::sqrt(s);
        best = std::max(best, delivered_power_wpt(mu, c));
    }
    CHECK(r.p_dc >= best);
    CHECK(r.p_dc >= 9.0 * c.eta);
}

TEST_CASE("deterministic optimum on flat channels has equally spaced phases")
{
    OptConfig cfg;
    cfg.multistart_wpt = 200;
    for (int n : {3, 5})
    {
        const WptResult r = optimize_wpt(coefficients(flat_channel(n, 0.1), kDiode), cfg);
        CHECK(phase_gap_spread(r.mu) <= 1e-2);

        // Common phase rotation leaves the flat-channel objective unchanged.
        CVec rotated = r.mu;
        for (auto &m : rotated)
            m *= std::polar(1.0, 0.7);
        CHECK_THAT(delivered_power_wpt(rotated, coefficients(flat_channel(n, 0.1), kDiode)), WithinRel(r.p_dc, 1e-12));
    }
}

TEST_CASE("deterministic optimum is reproducible for a seed and thread count")
{
    const PowerCoeffs c = coefficients(reference_channel(), kDiode);
    OptConfig cfg;
    cfg.multistart_wpt = 40;
    cfg.seed = 17;
    const WptResult a = optimize_wpt(c, cfg);
    set_thread_count(3);
    const WptResult b = optimize_wpt(c, cfg);
    set_thread_count(1);
    CHECK(a.mu == b.mu);
    CHECK(a.p_dc == b.p_dc);
    CHECK(a.best_restart == b.best_restart);
}

TEST_CASE("rate-only weighting returns waterfilling from a waterfilling start")
{
    const FreqChannel ch = reference_channel();
    const PowerCoeffs c = coefficients(ch, kDiode);
    OptConfig cfg;
    const GaussianInput wf = waterfill(ch, 1.0);
    for (MeanFamily family : {MeanFamily::Asymmetric, MeanFamily::Symmetric})
    {
        const SwiptResult r = optimize_swipt_nzm(c, ch, cfg, wf, family);
        CHECK(r.kkt.pass);
        for (std::size_t l = 0; l < 9; ++l)
        {
            CHECK_THAT(r.input.p_r[l], WithinAbs(wf.p_r[l], 1e-6));
            CHECK_THAT(r.input.p_i[l], WithinAbs(wf.p_i[l], 1e-6));
            CHECK(r.input.mu_r[l] == 0.0);
            CHECK(r.input.mu_i[l] == 0.0);
        }
    }
}

TEST_CASE("heavy power weighting keeps a deterministic start deterministic where it is power-optimal")
{
    // On a flat nine-subcarrier channel the deterministic optimum carries more power than any
    // single-component Gaussian, so the heavily weighted problem stays near it.
    const FreqChannel ch = flat_channel(9, 0.1);
    const PowerCoeffs c = coefficients(ch, kDiode);
    OptConfig cfg;
    cfg.multistart_wpt = 200;
    const WptResult w = optimize_wpt(c, cfg);
    cfg.lambda2 = 1000.0;
    const SwiptResult r = optimize_swipt_nzm(c, ch, cfg, GaussianInput::deterministic(w.mu));
    CHECK(r.rate < 0.05);
    CHECK_THAT(r.p_dc, WithinRel(w.p_dc, 0.01));
    CHECK(r.kkt.pass);
}

TEST_CASE("heavy power weighting never loses power relative to the deterministic start")
{
    const FreqChannel ch = reference_channel();
    const PowerCoeffs c = coefficients(ch, kDiode);
    OptConfig cfg;
    cfg.multistart_wpt = 200;
    const WptResult w = optimize_wpt(c, cfg);
    cfg.lambda2 = 1000.0;
    const SwiptResult r = optimize_swipt_nzm(c, ch, cfg, GaussianInput::deterministic(w.mu));
    CHECK(r.p_dc >= 0.99 * w.p_dc);
    CHECK(r.objective >= objective(GaussianInput::deterministic(w.mu), c, ch, cfg.lambda2));
}

TEST_CASE("intermediate weighting dominates both references")
{
    const FreqChannel ch = reference_channel();
    const PowerCoeffs c = coefficients(ch, kDiode);
    OptConfig cfg;
    cfg.multistart_wpt = 200;
    const GaussianInput start = GaussianInput::deterministic(optimize_wpt(c, cfg).mu);
    const GaussianInput wf = waterfill(ch, 1.0);
    for (double lambda2 : {0.3, 1.0, 3.0})
    {
        cfg.lambda2 = lambda2;
        for (MeanFamily family : {MeanFamily::Asymmetric, MeanFamily::Symmetric})
        {
            const SwiptResult r = optimize_swipt_nzm(c, ch, cfg, start, family);
            CHECK(r.status == SolveStatus::Converged);
            CHECK(r.kkt.pass);
            CHECK(r.objective >= objective(start, c, ch, lambda2) - 1e-9);
            CHECK(r.objective >= objective(wf, c, ch, lambda2) - 1e-9);
            CHECK_THAT(r.input.total_power(), WithinAbs(1.0, cfg.tol_feas));
        }
    }
}

TEST_CASE("infeasible warm starts are rejected")
{
    const FreqChannel ch = reference_channel();
    const PowerCoeffs c = coefficients(ch, kDiode);
    GaussianInput bad = waterfill(ch, 1.0);
    bad.mu_r[0] = 1.0;
    try
    {
        optimize_swipt_nzm(c, ch, OptConfig{}, bad);
        FAIL("expected InfeasibleStart");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::InfeasibleStart);
    }
    CHECK_THROWS_AS(optimize_swipt_nzm(c, ch, OptConfig{}, waterfill(ch, 2.0)), Error);
}

TEST_CASE("zero-mean optimum at zero weight is waterfilling")
{
    const FreqChannel ch = reference_channel();
    const PowerCoeffs c = coefficients(ch, kDiode);
    OptConfig cfg;
    cfg.multistart_zm = 10;
    const SwiptResult r = optimize_swipt_zm(c, ch, cfg);
    const GaussianInput wf = waterfill(ch, 1.0);
    for (std::size_t l = 0; l < 9; ++l)
    {
        CHECK_THAT(r.input.p_r[l], WithinAbs(wf.p_r[l], 1e-6));
        CHECK_THAT(r.input.p_i[l], WithinAbs(wf.p_i[l], 1e-6));
    }
    CHECK(r.kkt.pass);
}

TEST_CASE("zero-mean optimum under heavy weighting favors the strongest subcarrier's real part")
{
    const FreqChannel ch = reference_channel();
    const PowerCoeffs c = coefficients(ch, kDiode);
    OptConfig cfg;
    cfg.lambda2 = 10.0;
    const SwiptResult r = optimize_swipt_zm(c, ch, cfg);
    const std::size_t top = strongest(ch);
    double largest = 0.0;
    std::size_t where = 0;
    for (std::size_t l = 0; l < 9; ++l)
    {
        if (r.input.p_r[l] > largest)
        {
            largest = r.input.p_r[l];
            where = l;
        }
        CHECK(r.input.p_r[l] >= r.input.p_i[l]);
    }
    CHECK(where == top);
    CHECK(r.rate > 0.0);
    CHECK(r.kkt.pass);
}

TEST_CASE("zero-mean solutions pass the independent optimality check across weights")
{
    const FreqChannel ch = reference_channel();
    const PowerCoeffs c = coefficients(ch, kDiode);
    OptConfig cfg;
    cfg.multistart_zm = 8;
    for (double lambda2 : {0.05, 0.5, 2.0, 5.0})
    {
        cfg.lambda2 = lambda2;
        const SwiptResult r = optimize_swipt_zm(c, ch, cfg);
        CHECK(r.status == SolveStatus::Converged);
        const double l1 = estimate_lambda1_zm(r.input, lambda2, c, ch);
        const KKTReport k = kkt_residuals_zm(r.input, l1, lambda2, c, ch, 1.0);
        CHECK(k.pass);
        CHECK_THAT(l1, WithinRel(r.kkt.lambda1, 1e-7));
        CHECK(r.p_dc >= 9.0 * c.eta);

        // Swapping components of a zero-mean solution preserves both objectives.
        GaussianInput swapped = r.input;
        std::swap(swapped.p_r[2], swapped.p_i[2]);
        CHECK_THAT(rate(swapped, ch), WithinRel(r.rate, 1e-13));
        CHECK_THAT(delivered_power(swapped, c), WithinRel(r.p_dc, 1e-13));
    }
}

TEST_CASE("zero-mean multistart is reproducible across thread counts")
{
    const FreqChannel ch = reference_channel();
    const PowerCoeffs c = coefficients(ch, kDiode);
    OptConfig cfg;
    cfg.lambda2 = 4.0;
    cfg.multistart_zm = 12;
    const SwiptResult a = optimize_swipt_zm(c, ch, cfg);
    set_thread_count(4);
    const SwiptResult b = optimize_swipt_zm(c, ch, cfg);
    set_thread_count(1);
    CHECK(a.input.p_r == b.input.p_r);
    CHECK(a.input.p_i == b.input.p_i);
}

TEST_CASE("optimality check on closed-form waterfilling")
{
    const FreqChannel ch = reference_channel();
    const PowerCoeffs c = coefficients(ch, kDiode);
    const WaterfillSolution sol = waterfill_solution(ch, 1.0);
    const RateConstants rc = rate_constants(ch);
    const double lambda1 = rc.c1 * rc.a[0] / (1.0 + rc.a[0] * sol.input.p_r[0]);
    const KKTReport k = kkt_residuals_zm(sol.input, lambda1, 0.0, c, ch, 1.0);
    CHECK(k.stationarity_residual <= 1e-10);
    CHECK(k.complementarity_residual <= 1e-10);
    CHECK(k.feasibility_residual <= 1e-10);
    CHECK(k.pass);
}

TEST_CASE("optimality check flags perturbations and non-zero means")
{
    const FreqChannel ch = reference_channel();
    const PowerCoeffs c = coefficients(ch, kDiode);
    OptConfig cfg;
    cfg.lambda2 = 1.0;
    cfg.multistart_zm = 5;
    const SwiptResult r = optimize_swipt_zm(c, ch, cfg);
    GaussianInput bumped = r.input;
    bumped.p_r[3] *= 1.01;
    const KKTReport base = kkt_residuals_zm(r.input, r.kkt.lambda1, 1.0, c, ch, 1.0);
    const KKTReport moved = kkt_residuals_zm(bumped, r.kkt.lambda1, 1.0, c, ch, 1.0);
    CHECK(moved.stationarity_residual > base.stationarity_residual);
    CHECK_FALSE(moved.pass);

    GaussianInput meaned = r.input;
    meaned.mu_r[0] = 0.01;
    try
    {
        kkt_residuals_zm(meaned, 1.0, 1.0, c, ch, 1.0);
        FAIL("expected NonZeroMean");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::NonZeroMean);
    }
}

TEST_CASE("delivered-power target gap is reported")
{
    const FreqChannel ch = reference_channel();
    const PowerCoeffs c = coefficients(ch, kDiode);
    const WaterfillSolution sol = waterfill_solution(ch, 1.0);
    const double pdc = delivered_power(sol.input, c);
    CHECK(kkt_residuals_zm(sol.input, sol.lambda1, 0.0, c, ch, 1.0, 1e-8, 1e-10, pdc - 0.1).delivered_power_gap == 0.0);
    const KKTReport k = kkt_residuals_zm(sol.input, sol.lambda1, 0.0, c, ch, 1.0, 1e-8, 1e-10, pdc + 0.5);
    CHECK_THAT(k.delivered_power_gap, WithinRel(0.5, 1e-12));
    CHECK_FALSE(k.pass);
}

TEST_CASE("G intersections for the two-component example")
{
    const double lambda1 = 1.6529;
    const auto roots = solve_G_intersections(kExampleConstants, lambda1);
    REQUIRE(roots.size() == 4);
    int inadmissible = 0;
    for (const auto &[x, y] : roots)
    {
        CHECK(x >= 0.0);
        CHECK(y >= 0.0);
        CHECK(std::abs(lambda1 - g_value(kExampleConstants, x, y)) <= 1e-10);
        CHECK(std::abs(lambda1 - g_value(kExampleConstants, y, x)) <= 1e-10);
        CHECK(kkt_row_residual(kExampleConstants, lambda1, x, y) <= 1e-10);
        if (x + y > 1.0)
            ++inadmissible;
    }
    CHECK(inadmissible == 1);
}

TEST_CASE("G intersections above G(0,0) and mirror symmetry")
{
    CHECK_THAT(g_value(kExampleConstants, 0.0, 0.0), WithinAbs(180.62, 5e-3));
    for (double lambda1 : {1.6529, 5.0, 200.0})
    {
        const auto roots = solve_G_intersections(kExampleConstants, lambda1);
        if (lambda1 == 200.0)
            CHECK(roots.size() == 3);
        for (const auto &[x, y] : roots)
        {
            if (x == y)
                continue;
            const bool mirrored = std::any_of(roots.begin(), roots.end(), [&](const auto &r) {
                return r.first == y && r.second == x;
            });
            CHECK(mirrored);
        }
    }
}

TEST_CASE("G intersection count matches grid enumeration")
{
    // Independent oracle: Newton with a numerical Jacobian started from every cell of a
    // log-spaced grid, roots merged within 1e-7.
    auto enumerate = [](const GConstants &k, double lambda1, double hi) {
        std::vector<std::pair<double, double>> found;
        auto f = [&](double x, double y) {
            return std::array<double, 2>{g_value(k, x, y) - lambda1, g_value(k, y, x) - lambda1};
        };
        const int cells = 40;
        for (int i = 0; i <= cells; ++i)
            for (int j = 0; j <= cells; ++j)
            {
                double x = hi * std::pow(1e-7, 1.0 - i / double(cells));
                double y = hi * std::pow(1e-7, 1.0 - j / double(cells));
                for (int it = 0; it < 100; ++it)
                {
                    const auto r = f(x, y);
                    const double h = 1e-9;
                    const auto rx = f(x + h * std::max(1.0, x), y), ry = f(x, y + h * std::max(1.0, y));
                    const double a = (rx[0] - r[0]) / (h * std::max(1.0, x)), b = (ry[0] - r[0]) / (h * std::max(1.0, y));
                    const double c = (rx[1] - r[1]) / (h * std::max(1.0, x)), d = (ry[1] - r[1]) / (h * std::max(1.0, y));
                    const double det = a * d - b * c;
                    if (det == 0.0)
                        break;
                    x = std::max(0.0, x - (d * r[0] - b * r[1]) / det);
                    y = std::max(0.0, y - (-c * r[0] + a * r[1]) / det);
                }
                const auto r = f(x, y);
                if (std::max(std::abs(r[0]), std::abs(r[1])) > 1e-9)
                    continue;
                const bool known = std::any_of(found.begin(), found.end(), [&](const auto &p) {
                    return std::abs(p.first - x) < 1e-7 && std::abs(p.second - y) < 1e-7;
                });
                if (!known)
                    found.emplace_back(x, y);
            }
        return found.size();
    };
    CHECK(enumerate(kExampleConstants, 1.6529, 2.0) == solve_G_intersections(kExampleConstants, 1.6529).size());
    CHECK(enumerate(kExampleConstants, 200.0, 300.0) == solve_G_intersections(kExampleConstants, 200.0).size());
}

TEST_CASE("feasibility projection")
{
    std::mt19937_64 gen(21);
    const GaussianInput feasible = testing::random_input(gen, 5, 1.0);
    const GaussianInput same = project_feasible(feasible, 1.0);
    CHECK(same.p_r == feasible.p_r);
    CHECK(same.mu_r == feasible.mu_r);

    const GaussianInput doubled = GaussianInput::zero_mean({0.4, 0.2}, {0.6, 0.8});
    const GaussianInput halved = project_feasible(doubled, 1.0);
    CHECK_THAT(halved.p_r[0], WithinRel(0.2, 1e-15));
    CHECK_THAT(halved.p_i[1], WithinRel(0.4, 1e-15));

    std::normal_distribution<double> nd(0.0, 1.0);
    for (int t = 0; t < 50; ++t)
    {
        GaussianInput in = GaussianInput::zeros(5);
        for (std::size_t l = 0; l < 5; ++l)
        {
            in.mu_r[l] = nd(gen);
            in.mu_i[l] = nd(gen);
            in.p_r[l] = std::abs(nd(gen));
            in.p_i[l] = std::abs(nd(gen));
        }
        const GaussianInput out = project_feasible(in, 1.3);
        CHECK_THAT(out.total_power(), WithinAbs(1.3, 1e-12));
        for (std::size_t l = 0; l < 5; ++l)
        {
            CHECK(out.var_r(l) >= -1e-12);
            CHECK(out.var_i(l) >= -1e-12);
            CHECK(std::signbit(out.mu_r[l]) == std::signbit(in.mu_r[l]));
        }
        CHECK_NOTHROW(validate(out));
    }
}

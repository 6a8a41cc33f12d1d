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

#include <algorithm>
#include <array>
#include <cmath>

namespace nlswipt
{

namespace
{

void check_sizes(const GaussianInput &input, const PowerCoeffs &coeffs, const FreqChannel &ch)
{
    if (ch.size() != static_cast<std::size_t>(coeffs.n) || input.size() != ch.size())
        throw Error(ErrorCode::DimensionMismatch, "input, channel and coefficient lengths differ");
}

double feasibility(const GaussianInput &input, double p_a)
{
    double f = std::abs(input.total_power() - p_a) / std::max(1.0, p_a);
    for (std::size_t l = 0; l < input.size(); ++l)
        f = std::max({f, -input.var_r(l), -input.var_i(l)});
    return f;
}

void finish(KKTReport &k, const GaussianInput &input, const PowerCoeffs &coeffs, double tol_grad, double tol_feas,
            std::optional<double> p_d)
{
    const double norm = std::max(1.0, std::abs(k.lambda1));
    k.stationarity_residual /= norm;
    k.complementarity_residual /= norm;
    if (p_d)
        k.delivered_power_gap = std::max(0.0, *p_d - delivered_power(input, coeffs));
    k.pass = k.stationarity_residual <= tol_grad && k.complementarity_residual <= tol_grad &&
             k.feasibility_residual <= tol_feas && k.delivered_power_gap <= tol_feas * std::max(1.0, p_d.value_or(0.0));
}

// Derivative of the weighted objective in each component power, at fixed means.
struct PowerSlopes
{
    RVec r;
    RVec i;
};

PowerSlopes power_slopes(const GaussianInput &input, const InputGradient &g, double lambda2, const RateConstants &rc)
{
    PowerSlopes s{RVec(input.size()), RVec(input.size())};
    for (std::size_t l = 0; l < input.size(); ++l)
    {
        s.r[l] = rc.c1 * rc.a[l] / (1.0 + rc.a[l] * std::max(0.0, input.var_r(l))) + lambda2 * g.p_r[l];
        s.i[l] = rc.c1 * rc.a[l] / (1.0 + rc.a[l] * std::max(0.0, input.var_i(l))) + lambda2 * g.p_i[l];
    }
    return s;
}

} // namespace

double estimate_lambda1_zm(const GaussianInput &input, double lambda2, const PowerCoeffs &coeffs, const FreqChannel &ch)
{
    check_sizes(input, coeffs, ch);
    const PowerSlopes s = power_slopes(input, grad_f_ib(input, coeffs), lambda2, rate_constants(ch));
    double sum = 0.0;
    int count = 0;
    for (std::size_t l = 0; l < input.size(); ++l)
    {
        if (input.p_r[l] > 0.0)
        {
            sum += s.r[l];
            ++count;
        }
        if (input.p_i[l] > 0.0)
        {
            sum += s.i[l];
            ++count;
        }
    }
    return count > 0 ? sum / count : 0.0;
}

double estimate_lambda1_nzm(const GaussianInput &input, double lambda2, const PowerCoeffs &coeffs, const FreqChannel &ch)
{
    check_sizes(input, coeffs, ch);
    const InputGradient g = grad_f_ib(input, coeffs);
    const RateConstants rc = rate_constants(ch);
    const PowerSlopes s = power_slopes(input, g, lambda2, rc);
    // Least squares over the mean rows (normal 2 mu) and the rows of strictly positive variances (normal 1).
    double gn = 0.0, nn = 0.0;
    for (std::size_t l = 0; l < input.size(); ++l)
    {
        const std::array<double, 2> mu{input.mu_r[l], input.mu_i[l]};
        const std::array<double, 2> gmu{g.mu_r[l], g.mu_i[l]};
        const std::array<double, 2> gp{g.p_r[l], g.p_i[l]};
        const std::array<double, 2> slope{s.r[l], s.i[l]};
        const std::array<double, 2> var{input.var_r(l), input.var_i(l)};
        for (int c = 0; c < 2; ++c)
        {
            // Mean derivative at fixed variance: rate does not move, f_ib picks up 2 mu dP.
            const double gm = lambda2 * (gmu[c] + 2.0 * mu[c] * gp[c]);
            gn += gm * 2.0 * mu[c];
            nn += 4.0 * mu[c] * mu[c];
            if (var[c] > 0.0)
            {
                gn += slope[c];
                nn += 1.0;
            }
        }
    }
    return nn > 0.0 ? gn / nn : 0.0;
}

KKTReport kkt_residuals_zm(const GaussianInput &input, double lambda1, double lambda2, const PowerCoeffs &coeffs,
                           const FreqChannel &ch, double p_a, double tol_grad, double tol_feas, std::optional<double> p_d)
{
    check_sizes(input, coeffs, ch);
    if (!input.is_zero_mean())
        throw Error(ErrorCode::NonZeroMean, "zero-mean optimality check needs zero means");
    validate(input);
    const PowerSlopes s = power_slopes(input, grad_f_ib(input, coeffs), lambda2, rate_constants(ch));

    KKTReport k;
    k.lambda1 = lambda1;
    k.lambda2 = lambda2;
    for (std::size_t l = 0; l < input.size(); ++l)
    {
        for (auto [p, g] : {std::pair{input.p_r[l], s.r[l]}, std::pair{input.p_i[l], s.i[l]}})
        {
            k.stationarity_residual =
                std::max(k.stationarity_residual, p > 0.0 ? std::abs(lambda1 - g) : std::max(0.0, g - lambda1));
            k.complementarity_residual = std::max(k.complementarity_residual, std::abs(p * (lambda1 - g)));
        }
    }
    k.feasibility_residual = feasibility(input, p_a);
    finish(k, input, coeffs, tol_grad, tol_feas, p_d);
    return k;
}

KKTReport kkt_residuals_nzm(const GaussianInput &input, double lambda1, double lambda2, const PowerCoeffs &coeffs,
                            const FreqChannel &ch, double p_a, double tol_grad, double tol_feas, std::optional<double> p_d)
{
    check_sizes(input, coeffs, ch);
    validate(input);
    const InputGradient g = grad_f_ib(input, coeffs);
    const RateConstants rc = rate_constants(ch);
    const PowerSlopes s = power_slopes(input, g, lambda2, rc);

    KKTReport k;
    k.lambda1 = lambda1;
    k.lambda2 = lambda2;
    for (std::size_t l = 0; l < input.size(); ++l)
    {
        const std::array<double, 2> mu{input.mu_r[l], input.mu_i[l]};
        const std::array<double, 2> gmu{g.mu_r[l], g.mu_i[l]};
        const std::array<double, 2> slope{s.r[l], s.i[l]};
        const std::array<double, 2> var{input.var_r(l), input.var_i(l)};
        for (int c = 0; c < 2; ++c)
        {
            // rho multiplies the variance constraint P - mu^2 >= 0
            const double rho = lambda1 - slope[c];
            const double rate_mu = -2.0 * mu[c] * rc.c1 * rc.a[l] / (1.0 + rc.a[l] * std::max(0.0, var[c]));
            const double dmu = rate_mu + lambda2 * gmu[c];
            double r = std::abs(dmu - 2.0 * rho * mu[c]);
            r = std::max(r, var[c] > 0.0 ? std::abs(rho) : std::max(0.0, -rho));
            k.stationarity_residual = std::max(k.stationarity_residual, r);
            k.complementarity_residual = std::max(k.complementarity_residual, std::abs(rho * var[c]));
        }
    }
    k.feasibility_residual = feasibility(input, p_a);
    finish(k, input, coeffs, tol_grad, tol_feas, p_d);
    return k;
}

double g_value(const GConstants &k, double x, double y)
{
    return k.c1 * k.a / (1.0 + k.a * x) + k.lambda2 * (6.0 * k.alpha * x + 2.0 * k.alpha * y + k.beta + k.g1);
}

double kkt_row_residual(const GConstants &k, double lambda1, double p_r, double p_i)
{
    double r = 0.0;
    for (auto [x, y] : {std::pair{p_r, p_i}, std::pair{p_i, p_r}})
    {
        const double g = g_value(k, x, y);
        r = std::max(r, x > 0.0 ? std::abs(lambda1 - g) : std::max(0.0, g - lambda1));
    }
    return r;
}

namespace
{

// Real roots of A s^2 + B s + C = 0 without cancellation.
std::vector<double> quadratic_roots(double A, double B, double C)
{
    if (A == 0.0)
        return B != 0.0 ? std::vector<double>{-C / B} : std::vector<double>{};
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0.0)
        return {};
    const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
    if (q == 0.0)
        return {0.0};
    std::vector<double> r{q / A, C / q};
    std::sort(r.begin(), r.end());
    return r;
}

std::pair<double, double> polish(const GConstants &k, double lambda1, double x, double y)
{
    auto resid = [&](double u, double v) {
        return std::array<double, 2>{g_value(k, u, v) - lambda1, g_value(k, v, u) - lambda1};
    };
    auto norm = [](const std::array<double, 2> &f) { return std::max(std::abs(f[0]), std::abs(f[1])); };
    std::array<double, 2> f = resid(x, y);
    for (int it = 0; it < 60 && norm(f) > 1e-14 * std::max(1.0, std::abs(lambda1)); ++it)
    {
        const double dx = 1.0 + k.a * x, dy = 1.0 + k.a * y;
        const double j11 = -k.c1 * k.a * k.a / (dx * dx) + 6.0 * k.lambda2 * k.alpha;
        const double j22 = -k.c1 * k.a * k.a / (dy * dy) + 6.0 * k.lambda2 * k.alpha;
        const double j12 = 2.0 * k.lambda2 * k.alpha;
        const double det = j11 * j22 - j12 * j12;
        if (det == 0.0)
            break;
        const double sx = -(j22 * f[0] - j12 * f[1]) / det;
        const double sy = -(-j12 * f[0] + j11 * f[1]) / det;
        bool improved = false;
        for (double t = 1.0; t > 1e-6; t *= 0.5)
        {
            const double nx = std::max(0.0, x + t * sx), ny = std::max(0.0, y + t * sy);
            const auto nf = resid(nx, ny);
            if (norm(nf) < norm(f))
            {
                x = nx;
                y = ny;
                f = nf;
                improved = true;
                break;
            }
        }
        if (!improved)
            break;
    }
    return {x, y};
}

} // namespace

std::vector<std::pair<double, double>> solve_G_intersections(const GConstants &k, double lambda1)
{
    std::vector<std::pair<double, double>> out;
    if (!(k.a > 0.0) || !(k.c1 > 0.0))
        return out;
    const double la = k.lambda2 * k.alpha;
    const double lin = k.lambda2 * (k.beta + k.g1);

    // G(x,y) - G(y,x) = (x - y) (4 la - c1 a^2 / ((1 + a x)(1 + a y))), so either x = y
    // or (1 + a x)(1 + a y) = c1 a^2 / (4 la). Both branches are quadratics in s = 1 + a x.
    const std::vector<double> diag = quadratic_roots(8.0 * la / k.a, lin - 8.0 * la / k.a - lambda1, k.c1 * k.a);
    for (double s : diag)
    {
        if (s < 1.0)
            continue;
        const double x0 = (s - 1.0) / k.a;
        const auto [x, y] = polish(k, lambda1, x0, x0);
        out.emplace_back(x, y);
    }

    if (la > 0.0)
    {
        const double prod = k.c1 * k.a * k.a / (4.0 * la);
        const std::vector<double> off =
            quadratic_roots(6.0 * la / k.a, lin - 8.0 * la / k.a - lambda1, k.c1 * k.a + 2.0 * la * prod / k.a);
        // The two roots are s and prod / s; one pair of mirrored points.
        if (off.size() == 2 && off[0] >= 1.0 && off[1] >= 1.0 && off[0] < off[1])
        {
            const double big = (off[1] - 1.0) / k.a, small = (prod / off[1] - 1.0) / k.a;
            const auto [x, y] = polish(k, lambda1, big, small);
            out.emplace_back(x, y);
            out.emplace_back(y, x);
        }
    }
    return out;
}

} // namespace nlswipt

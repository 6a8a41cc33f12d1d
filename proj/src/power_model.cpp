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

#include "nlswipt/power_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace nlswipt
{

namespace
{

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

void require_size(std::size_t got, std::size_t want, const char *what)
{
    if (got != want)
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + ": expected length " + std::to_string(want) + ", got " + std::to_string(got));
}

// Permits rounding slack in deterministic inputs built as P = mu^2.
inline bool variance_ok(double p, double mu) { return p - mu * mu >= -1e-12 * (1.0 + std::abs(p)); }

inline double nonneg(double v) { return v > 0.0 ? v : 0.0; }

// A_l = sum_k conj(mu_{l+k}) conj(mu_{l-k}) phi_{l,k}
cplx pseudo_coupling(int l, std::span<const cplx> mu, const PowerCoeffs &c)
{
    const int n = c.n;
    cplx acc(0.0, 0.0);
    for (int k = 1; k <= c.half(); ++k)
        acc += std::conj(mu[wrap(l + k, n)] * mu[wrap(l - k, n)]) * c.phi_at(l, k);
    return acc;
}

double psi_sum(std::span<const cplx> mu, const PowerCoeffs &c)
{
    const int n = c.n;
    double acc = 0.0;
    for (const auto &e : c.psi)
    {
        const cplx t = mu[e.l] * std::conj(mu[e.m]) * std::conj(mu[wrap(e.l - e.k, n)]) * mu[wrap(e.m - e.k, n)];
        acc += (t * e.value).real();
    }
    return acc;
}

} // namespace

void validate(const DiodeModel &diode)
{
    if (!(diode.k2 >= 0.0) || !(diode.k4 >= 0.0) || (diode.k2 == 0.0 && diode.k4 == 0.0))
        throw Error(ErrorCode::InvalidDiode, "diode constants must be nonnegative and not both zero", "diode");
}

double GaussianInput::total_power() const
{
    double s = 0.0;
    for (std::size_t l = 0; l < size(); ++l)
        s += p_r[l] + p_i[l];
    return s;
}

CVec GaussianInput::means() const
{
    CVec mu(size());
    for (std::size_t l = 0; l < size(); ++l)
        mu[l] = mean(l);
    return mu;
}

bool GaussianInput::is_zero_mean() const
{
    for (std::size_t l = 0; l < size(); ++l)
        if (mu_r[l] != 0.0 || mu_i[l] != 0.0)
            return false;
    return true;
}

GaussianInput GaussianInput::zeros(std::size_t n)
{
    return {RVec(n, 0.0), RVec(n, 0.0), RVec(n, 0.0), RVec(n, 0.0)};
}

GaussianInput GaussianInput::zero_mean(RVec p_r, RVec p_i)
{
    require_size(p_i.size(), p_r.size(), "p_i");
    const std::size_t n = p_r.size();
    return {RVec(n, 0.0), RVec(n, 0.0), std::move(p_r), std::move(p_i)};
}

GaussianInput GaussianInput::deterministic(std::span<const cplx> mu)
{
    GaussianInput in = zeros(mu.size());
    for (std::size_t l = 0; l < mu.size(); ++l)
    {
        in.mu_r[l] = mu[l].real();
        in.mu_i[l] = mu[l].imag();
        in.p_r[l] = in.mu_r[l] * in.mu_r[l];
        in.p_i[l] = in.mu_i[l] * in.mu_i[l];
    }
    return in;
}

void validate(const GaussianInput &input)
{
    const std::size_t n = input.size();
    require_size(input.p_i.size(), n, "p_i");
    require_size(input.mu_r.size(), n, "mu_r");
    require_size(input.mu_i.size(), n, "mu_i");
    for (std::size_t l = 0; l < n; ++l)
    {
        if (!variance_ok(input.p_r[l], input.mu_r[l]) || !variance_ok(input.p_i[l], input.mu_i[l]))
            throw Error(ErrorCode::NegativeVariance, "subcarrier " + std::to_string(l) + " has P < mu^2");
    }
}

namespace
{

Moments moments_unchecked(const GaussianInput &input)
{
    const std::size_t n = input.size();
    Moments m{RVec(n), RVec(n), CVec(n), CVec(n)};
    for (std::size_t l = 0; l < n; ++l)
    {
        const double pr = input.p_r[l], pi = input.p_i[l];
        const double mr = input.mu_r[l], mi = input.mu_i[l];
        m.q[l] = 3.0 * (pr * pr + pi * pi) - 2.0 * (mi * mi * mi * mi + mr * mr * mr * mr) + 2.0 * pr * pi;
        m.p[l] = pr + pi;
        m.pbar[l] = cplx(pr - pi, 2.0 * mr * mi);
        m.mu[l] = cplx(mr, mi);
    }
    return m;
}

} // namespace

Moments gaussian_moments(const GaussianInput &input)
{
    validate(input);
    return moments_unchecked(input);
}

PowerCoeffs coefficients(const FreqChannel &ch, const DiodeModel &diode)
{
    validate(diode);
    const int n = static_cast<int>(ch.size());
    require_size(ch.h_u.size(), ch.h.size(), "h_u");
    if (n < 1 || n % 2 == 0)
        throw Error(ErrorCode::EvenN, "delivered-power coefficients require an odd subcarrier count", "channel.N");

    const double k2 = diode.k2, k4 = diode.k4, s2 = ch.sigma_w2;
    const auto &h = ch.h;
    const auto &hu = ch.h_u;

    PowerCoeffs c;
    c.n = n;
    c.alpha.resize(n);
    c.beta.resize(n);
    c.gamma.assign(static_cast<std::size_t>(n) * n, 0.0);
    c.eta = k2 * s2 + 3.0 * k4 * s2 * s2;

    for (int l = 0; l < n; ++l)
    {
        const double g = std::norm(h[l]), gu = std::norm(hu[l]);
        c.alpha[l] = 3.0 * k4 / (4.0 * n) * (g * g + gu * gu);
        c.beta[l] = k2 * g + 3.0 * k4 * s2 * (g + gu);
        for (int m = 0; m < n; ++m)
        {
            if (m != l)
                c.gamma[static_cast<std::size_t>(m * n + l)] =
                    3.0 * k4 / n * (g * std::norm(h[m]) + gu * std::norm(hu[m]));
        }
    }

    // Terms k and n-k of the pseudo-moment coupling coincide; only k <= (n-1)/2 is stored,
    // hence 3k4/n rather than 3k4/(2n).
    const int half = c.half();
    c.phi.assign(static_cast<std::size_t>(n) * half, cplx(0.0, 0.0));
    for (int l = 0; l < n; ++l)
    {
        for (int k = 1; k <= half; ++k)
        {
            const int a = wrap(l + k, n), b = wrap(l - k, n);
            c.phi[static_cast<std::size_t>(l * half + k - 1)] =
                3.0 * k4 / n * (h[l] * h[l] * std::conj(h[a] * h[b]) + hu[l] * hu[l] * std::conj(hu[a] * hu[b]));
        }
    }

    for (int l = 0; l + 1 < n; ++l)
    {
        for (int k = 1; k <= half; ++k)
        {
            const int lk = wrap(l - k, n);
            for (int m = l + 1; m < n; ++m)
            {
                if (m == wrap(l + k, n) || m == lk)
                    continue;
                const int mk = wrap(m - k, n);
                const cplx v = 3.0 * k4 / n *
                               (h[l] * std::conj(h[m]) * std::conj(h[lk]) * h[mk] +
                                hu[l] * std::conj(hu[m]) * std::conj(hu[lk]) * hu[mk]);
                c.psi.push_back({l, m, k, v});
            }
        }
    }
    return c;
}

double delivered_power(const GaussianInput &input, const PowerCoeffs &c)
{
    validate(input);
    return detail::delivered_power_unchecked(input, c);
}

double detail::delivered_power_unchecked(const GaussianInput &input, const PowerCoeffs &c)
{
    require_size(input.size(), static_cast<std::size_t>(c.n), "input");
    const Moments mo = moments_unchecked(input);
    const int n = c.n;

    double total = 0.0;
    for (int l = 0; l < n; ++l)
    {
        double f = c.alpha[l] * mo.q[l] + c.beta[l] * mo.p[l] + c.eta;
        // g(P_l) P_l with g(P_l) = sum_{m>l} gamma_{m,l} P_m
        for (int m = l + 1; m < n; ++m)
            f += c.gamma_at(m, l) * mo.p[m] * mo.p[l];
        f += (mo.pbar[l] * pseudo_coupling(l, mo.mu, c)).real();
        total += f;
    }
    return total + psi_sum(mo.mu, c);
}

double delivered_power_wpt(std::span<const cplx> mu, const PowerCoeffs &c)
{
    require_size(mu.size(), static_cast<std::size_t>(c.n), "mu");
    const int n = c.n;
    double total = 0.0;
    for (int l = 0; l < n; ++l)
    {
        const double p = std::norm(mu[l]);
        double g = 0.0;
        for (int m = l + 1; m < n; ++m)
            g += c.gamma_at(m, l) * std::norm(mu[m]);
        total += c.alpha[l] * p * p + (c.beta[l] + g) * p + c.eta;
        total += (mu[l] * mu[l] * pseudo_coupling(l, mu, c)).real();
    }
    return total + psi_sum(mu, c);
}

double delivered_power_linear(const GaussianInput &input, const FreqChannel &ch)
{
    require_size(input.size(), ch.size(), "input");
    double total = 0.0;
    for (std::size_t l = 0; l < ch.size(); ++l)
        total += std::norm(ch.h[l]) * input.power(l) + ch.sigma_w2;
    return total;
}

RateConstants rate_constants(const FreqChannel &ch)
{
    if (!(ch.sigma_w2 > 0.0))
        throw Error(ErrorCode::NegativeNoise, "rate requires a positive noise variance", "channel.sigma_w2");
    const double n = static_cast<double>(ch.size());
    RateConstants rc;
    rc.c0 = ch.f_w / (2.0 * n);
    rc.c1 = rc.c0 * std::numbers::log2e;
    rc.a.resize(ch.size());
    for (std::size_t l = 0; l < ch.size(); ++l)
        rc.a[l] = 2.0 * n * std::norm(ch.h[l]) / (ch.f_w * ch.sigma_w2);
    return rc;
}

double rate(const GaussianInput &input, const FreqChannel &ch) { return rate(input, rate_constants(ch)); }

double rate(const GaussianInput &input, const RateConstants &rc)
{
    validate(input);
    require_size(input.size(), rc.a.size(), "input");
    double total = 0.0;
    for (std::size_t l = 0; l < input.size(); ++l)
    {
        total += std::log1p(rc.a[l] * nonneg(input.var_r(l)));
        total += std::log1p(rc.a[l] * nonneg(input.var_i(l)));
    }
    return rc.c0 * total * std::numbers::log2e;
}

RVec InputGradient::flatten() const
{
    RVec out;
    out.reserve(4 * p_r.size());
    out.insert(out.end(), p_r.begin(), p_r.end());
    out.insert(out.end(), p_i.begin(), p_i.end());
    out.insert(out.end(), mu_r.begin(), mu_r.end());
    out.insert(out.end(), mu_i.begin(), mu_i.end());
    return out;
}

InputGradient grad_f_ib(const GaussianInput &input, const PowerCoeffs &c)
{
    validate(input);
    return detail::grad_f_ib_unchecked(input, c);
}

InputGradient detail::grad_f_ib_unchecked(const GaussianInput &input, const PowerCoeffs &c)
{
    require_size(input.size(), static_cast<std::size_t>(c.n), "input");
    const Moments mo = moments_unchecked(input);
    const int n = c.n, half = c.half();
    const auto &mu = mo.mu;
    const cplx j(0.0, 1.0);

    InputGradient g{RVec(n, 0.0), RVec(n, 0.0), RVec(n, 0.0), RVec(n, 0.0)};

    for (int l = 0; l < n; ++l)
    {
        double g1 = 0.0; // sum_{m != l} gamma_{m,l} P_m
        for (int m = 0; m < n; ++m)
            if (m != l)
                g1 += c.gamma_at(m, l) * mo.p[m];

        const cplx a_l = pseudo_coupling(l, mu, c);
        const double pr = input.p_r[l], pi = input.p_i[l];
        g.p_r[l] = c.alpha[l] * (6.0 * pr + 2.0 * pi) + c.beta[l] + g1 + a_l.real();
        g.p_i[l] = c.alpha[l] * (6.0 * pi + 2.0 * pr) + c.beta[l] + g1 - a_l.real();

        const double mr = input.mu_r[l], mi = input.mu_i[l];
        g.mu_r[l] = -8.0 * c.alpha[l] * mr * mr * mr + (2.0 * j * mi * a_l).real();
        g.mu_i[l] = -8.0 * c.alpha[l] * mi * mi * mi + (2.0 * j * mr * a_l).real();

        // mu_l enters the pseudo-moment coupling of every other subcarrier d through
        // T_{l,d} = conj(mu_{2d-l}) phi_{d,k}, with k the unique offset in [1, half]
        // such that l = d + k or l = d - k (mod n).
        for (int d = 0; d < n; ++d)
        {
            if (d == l)
                continue;
            int k = wrap(l - d, n);
            if (k > half)
                k = n - k;
            const cplx t = std::conj(mu[wrap(2 * d - l, n)]) * c.phi_at(d, k);
            g.mu_r[l] += (mo.pbar[d] * t).real();
            g.mu_i[l] -= (j * mo.pbar[d] * t).real();
        }
    }

    // Four-mean couplings: the S_{d,m,k} Kronecker branches, scattered to the four indices.
    for (const auto &e : c.psi)
    {
        const int d = e.l, m = e.m, dk = wrap(d - e.k, n), mk = wrap(e.m - e.k, n);
        const cplx s_d = std::conj(mu[m]) * std::conj(mu[dk]) * mu[mk];
        const cplx s_m = mu[d] * std::conj(mu[dk]) * mu[mk];
        const cplx s_dk = mu[d] * std::conj(mu[m]) * mu[mk];
        const cplx s_mk = mu[d] * std::conj(mu[m]) * std::conj(mu[dk]);

        g.mu_r[d] += (e.value * s_d).real();
        g.mu_i[d] += (e.value * j * s_d).real();
        g.mu_r[m] += (e.value * s_m).real();
        g.mu_i[m] -= (e.value * j * s_m).real();
        g.mu_r[dk] += (e.value * s_dk).real();
        g.mu_i[dk] -= (e.value * j * s_dk).real();
        g.mu_r[mk] += (e.value * s_mk).real();
        g.mu_i[mk] += (e.value * j * s_mk).real();
    }
    return g;
}

InputGradient grad_rate(const GaussianInput &input, const RateConstants &rc)
{
    const std::size_t n = input.size();
    require_size(rc.a.size(), n, "rate constants");
    InputGradient g{RVec(n), RVec(n), RVec(n), RVec(n)};
    for (std::size_t l = 0; l < n; ++l)
    {
        const double dr = rc.c1 * rc.a[l] / (1.0 + rc.a[l] * nonneg(input.var_r(l)));
        const double di = rc.c1 * rc.a[l] / (1.0 + rc.a[l] * nonneg(input.var_i(l)));
        g.p_r[l] = dr;
        g.p_i[l] = di;
        g.mu_r[l] = -2.0 * input.mu_r[l] * dr;
        g.mu_i[l] = -2.0 * input.mu_i[l] * di;
    }
    return g;
}

} // namespace nlswipt

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

#ifndef NLSWIPT_POWER_MODEL_HPP
#define NLSWIPT_POWER_MODEL_HPP

#include "nlswipt/channel_model.hpp"
#include "nlswipt/types.hpp"

#include <span>
#include <vector>

namespace nlswipt
{

/// Small-signal rectifier model: P_dc = E[k2 y_rf^2 + k4 y_rf^4] averaged over time.
struct DiodeModel
{
    double k2 = 0.0034;
    double k4 = 0.3829;
};

void validate(const DiodeModel &diode);

/// One admissible (l, m, k) quadruple-mean coupling; l < m, m != (l +- k) mod n.
struct PsiEntry
{
    int l;
    int m;
    int k;
    cplx value;
};

/**
 * Channel- and diode-dependent constants of the delivered-power polynomial.
 *
 * Per subcarrier:  alpha_l multiplies E|V_l|^4, beta_l multiplies E|V_l|^2, eta is the
 * noise floor. gamma couples the powers of two subcarriers, phi couples the pseudo-moment
 * of l with the means of l+k and l-k, psi couples four distinct means.
 */
struct PowerCoeffs
{
    int n = 0;
    RVec alpha;
    RVec beta;
    RVec gamma; ///< n*n, row-major, symmetric, zero diagonal
    double eta = 0.0;
    CVec phi;   ///< n*half(), phi[l*half() + k-1] for k in [1, half()]
    std::vector<PsiEntry> psi;

    int half() const noexcept { return (n - 1) / 2; }
    double gamma_at(int m, int l) const { return gamma[static_cast<std::size_t>(m * n + l)]; }
    cplx phi_at(int l, int k) const { return phi[static_cast<std::size_t>(l * half() + k - 1)]; }
};

/// Independent real/imaginary Gaussian inputs, parameterized by means and second moments.
struct GaussianInput
{
    RVec mu_r;
    RVec mu_i;
    RVec p_r; ///< E[Re{V_l}^2]
    RVec p_i; ///< E[Im{V_l}^2]

    std::size_t size() const noexcept { return p_r.size(); }
    double total_power() const;
    double power(std::size_t l) const { return p_r[l] + p_i[l]; }
    double var_r(std::size_t l) const { return p_r[l] - mu_r[l] * mu_r[l]; }
    double var_i(std::size_t l) const { return p_i[l] - mu_i[l] * mu_i[l]; }
    cplx mean(std::size_t l) const { return {mu_r[l], mu_i[l]}; }
    CVec means() const;
    bool is_zero_mean() const;

    static GaussianInput zeros(std::size_t n);
    static GaussianInput zero_mean(RVec p_r, RVec p_i);
    /// Zero-variance input with the given complex means.
    static GaussianInput deterministic(std::span<const cplx> mu);
};

/// Throws NegativeVariance if some P < mu^2 beyond rounding, DimensionMismatch on ragged vectors.
void validate(const GaussianInput &input);

struct Moments
{
    RVec q;    ///< E|V|^4
    RVec p;    ///< E|V|^2
    CVec pbar; ///< E[V^2]
    CVec mu;   ///< E[V]
};

Moments gaussian_moments(const GaussianInput &input);

PowerCoeffs coefficients(const FreqChannel &ch, const DiodeModel &diode);

/// Closed-form delivered power (sum over subcarriers of the per-subcarrier contribution).
double delivered_power(const GaussianInput &input, const PowerCoeffs &coeffs);

/// Delivered power of a deterministic (zero-variance) input with complex means `mu`.
double delivered_power_wpt(std::span<const cplx> mu, const PowerCoeffs &coeffs);

/// Linear harvester: sum_l |h_l|^2 P_l + sigma_w^2.
double delivered_power_linear(const GaussianInput &input, const FreqChannel &ch);

/// Constants of the rate expression: c0 = f_w / 2N, c1 = c0 log2(e), a_l = 2N|h_l|^2 / (f_w sigma_w^2).
struct RateConstants
{
    double c0 = 0.0;
    double c1 = 0.0;
    RVec a;
};

RateConstants rate_constants(const FreqChannel &ch);

/// sum_l c0 (log2(1 + a_l var_r) + log2(1 + a_l var_i)). Depends only on the variances.
double rate(const GaussianInput &input, const FreqChannel &ch);
double rate(const GaussianInput &input, const RateConstants &rc);

/// Partial derivatives with respect to (P_lr, P_li, mu_lr, mu_li), each block of length n.
struct InputGradient
{
    RVec p_r;
    RVec p_i;
    RVec mu_r;
    RVec mu_i;

    /// [p_r | p_i | mu_r | mu_i]
    RVec flatten() const;
};

/// Analytic gradient of delivered_power with respect to the input parameters.
InputGradient grad_f_ib(const GaussianInput &input, const PowerCoeffs &coeffs);

/// Gradient of rate() in the same (P, mu) coordinates.
InputGradient grad_rate(const GaussianInput &input, const RateConstants &rc);

namespace detail
{
// Same polynomials without the variance check; defined for any real arguments, which
// finite-difference stencils straddling a zero variance rely on.
double delivered_power_unchecked(const GaussianInput &input, const PowerCoeffs &coeffs);
InputGradient grad_f_ib_unchecked(const GaussianInput &input, const PowerCoeffs &coeffs);
} // namespace detail

} // namespace nlswipt

#endif

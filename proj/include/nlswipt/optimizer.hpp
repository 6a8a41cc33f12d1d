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

#ifndef NLSWIPT_OPTIMIZER_HPP
#define NLSWIPT_OPTIMIZER_HPP

#include "nlswipt/channel_model.hpp"
#include "nlswipt/power_model.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace nlswipt
{

struct OptConfig
{
    double p_a = 1.0;         ///< average transmit power budget
    double lambda2 = 0.0;     ///< weight on delivered power
    int multistart_wpt = 1000;
    int multistart_zm = 50;
    std::uint64_t seed = 0;
    int max_iters = 20000;    ///< per local solve
    double tol_grad = 1e-8;   ///< stationarity, normalized by max(1, |lambda1|)
    double tol_feas = 1e-10;  ///< power constraint, normalized by max(1, p_a)
};

void validate(const OptConfig &cfg);

struct KKTReport
{
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double stationarity_residual = 0.0;
    double feasibility_residual = 0.0;
    double complementarity_residual = 0.0;
    double delivered_power_gap = 0.0; ///< max(0, P_d - f_ib) when a delivered-power target is given
    bool pass = false;
};

enum class SolveStatus
{
    Converged,
    MaxItersExceeded,
};

const char *to_string(SolveStatus status);

struct WaterfillSolution
{
    GaussianInput input;
    double lambda1 = 0.0;
    double level = 0.0; ///< c1 / lambda1
};

/// Rate-optimal zero-mean allocation with equal real and imaginary powers.
WaterfillSolution waterfill_solution(const FreqChannel &ch, double p_a);
GaussianInput waterfill(const FreqChannel &ch, double p_a);

struct WptResult
{
    CVec mu;
    double p_dc = 0.0;
    double stationarity = 0.0;
    int best_restart = 0;
    SolveStatus status = SolveStatus::Converged;
};

/// Best of cfg.multistart_wpt local maximizations of the deterministic delivered power on |mu|^2 = p_a.
WptResult optimize_wpt(const PowerCoeffs &coeffs, const OptConfig &cfg);

/// Non-zero-mean input families. Symmetric ties the real and imaginary variances of each subcarrier.
enum class MeanFamily
{
    Asymmetric,
    Symmetric,
};

struct SwiptResult
{
    GaussianInput input;
    double objective = 0.0; ///< rate + lambda2 * p_dc
    double rate = 0.0;
    double p_dc = 0.0;
    KKTReport kkt;
    SolveStatus status = SolveStatus::Converged;
    int iterations = 0;
    int best_restart = 0;
};

/**
 * Local maximizer of rate + lambda2 f_ib under sum P = p_a and nonnegative variances,
 * started from `warm_start`. Throws InfeasibleStart if the start has negative variances
 * or misses the power budget by more than 1e-6 relative.
 */
SwiptResult optimize_swipt_nzm(const PowerCoeffs &coeffs, const FreqChannel &ch, const OptConfig &cfg,
                               const GaussianInput &warm_start, MeanFamily family = MeanFamily::Asymmetric);

/// Best of cfg.multistart_zm random zero-mean starts plus the waterfilling start.
SwiptResult optimize_swipt_zm(const PowerCoeffs &coeffs, const FreqChannel &ch, const OptConfig &cfg);

/// Single zero-mean local solve from a given start (means are ignored).
SwiptResult optimize_swipt_zm_from(const PowerCoeffs &coeffs, const FreqChannel &ch, const OptConfig &cfg,
                                   const GaussianInput &start);

/// Least-squares multiplier of the power constraint for a zero-mean input.
double estimate_lambda1_zm(const GaussianInput &input, double lambda2, const PowerCoeffs &coeffs, const FreqChannel &ch);
double estimate_lambda1_nzm(const GaussianInput &input, double lambda2, const PowerCoeffs &coeffs, const FreqChannel &ch);

/**
 * Optimality conditions of the zero-mean problem. With G_lr the derivative of the weighted
 * objective in P_lr (and G_li likewise):
 *   loaded components need G = lambda1, unloaded ones G <= lambda1, and P (lambda1 - G) = 0.
 */
KKTReport kkt_residuals_zm(const GaussianInput &input, double lambda1, double lambda2, const PowerCoeffs &coeffs,
                           const FreqChannel &ch, double p_a, double tol_grad = 1e-8, double tol_feas = 1e-10,
                           std::optional<double> p_d = std::nullopt);

/// Optimality conditions of the non-zero-mean problem, with the variance multipliers recovered from the P rows.
KKTReport kkt_residuals_nzm(const GaussianInput &input, double lambda1, double lambda2, const PowerCoeffs &coeffs,
                            const FreqChannel &ch, double p_a, double tol_grad = 1e-8, double tol_feas = 1e-10,
                            std::optional<double> p_d = std::nullopt);

/// Scalars of one subcarrier's zero-mean stationarity function.
struct GConstants
{
    double c1 = 0.0;
    double a = 0.0;
    double lambda2 = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double g1 = 0.0;
};

/// G(x, y) = c1 a / (1 + a x) + lambda2 (6 alpha x + 2 alpha y + beta + g1)
double g_value(const GConstants &k, double x, double y);

/// Residual of one subcarrier's stationarity rows at (p_r, p_i): equality where loaded, dual feasibility where not.
double kkt_row_residual(const GConstants &k, double lambda1, double p_r, double p_i);

/// All nonnegative (x, y) with G(x, y) = G(y, x) = lambda1.
std::vector<std::pair<double, double>> solve_G_intersections(const GConstants &k, double lambda1);

/// Scales P onto the budget, then clips each mean so mean^2 <= P (sign kept).
GaussianInput project_feasible(const GaussianInput &input, double p_a);

} // namespace nlswipt

#endif

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

#ifndef NLSWIPT_RP_SWEEP_HPP
#define NLSWIPT_RP_SWEEP_HPP

#include "nlswipt/channel_model.hpp"
#include "nlswipt/optimizer.hpp"
#include "nlswipt/power_model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nlswipt
{

/// Input families compared in a rate-power sweep.
enum class Family
{
    ANG, ///< non-zero mean, per-component variances
    SNG, ///< non-zero mean, equal variances on each subcarrier
    ZG,  ///< zero mean, nonlinear harvester
    ZGL, ///< zero mean, allocated for the linear harvester
};

const char *to_string(Family family);
Family family_from_string(std::string_view name);

struct RPPoint
{
    double rate = 0.0;
    double p_dc = 0.0;       ///< nonlinear delivered power
    double p_dc_linear = 0.0; ///< linear-model received power, sum |h|^2 P + noise
    double lambda2 = 0.0;    ///< weight on delivered power (ZGL: weight on the linear proxy); infinity for the WPT anchor
    GaussianInput input;
    Family family = Family::ZG;
    bool converged = true;
    std::string error;       ///< non-empty when the solve for this weight threw
};

struct CurveMetadata
{
    std::uint64_t channel_hash = 0;
    int n = 0;
    double p_a = 0.0;
    double sigma_w2 = 0.0;
    DiodeModel diode;
    std::uint64_t seed = 0;
};

struct RPCurve
{
    Family family = Family::ZG;
    std::vector<RPPoint> points; ///< Pareto-filtered: p_dc descending, rate increasing
    std::vector<RPPoint> raw;    ///< every solve in schedule order, including flagged ones
    CurveMetadata metadata;
};

struct SweepConfig
{
    OptConfig opt;               ///< p_a and lambda2 are overwritten per point
    double lambda2_max = 100.0;
    double lambda2_min = 1e-4;
    int lambda2_points = 61;     ///< geometric schedule, followed by lambda2 = 0
    int zgl_points = 61;
    double refine_rate_gap = 0.01;  ///< bisect weights whose solutions differ in rate by more than this share of the largest rate
    double refine_min_ratio = 1e-3; ///< stop bisecting once neighboring weights are this close (relative)
    int max_refinements = 200;
};

void validate(const SweepConfig &cfg);

/// Descending geometric schedule from lambda2_max to lambda2_min, then 0.
RVec lambda2_schedule(const SweepConfig &cfg);

/// Order-sensitive FNV hash of the channel's responses, size, bandwidth and noise.
std::uint64_t channel_hash(const FreqChannel &ch);

/**
 * Rate-power curve of one family. Non-zero-mean families start from the WPT optimum and
 * follow the weight schedule downward, each point warm-started from the previous one; zero-mean
 * points also run the multistart search. Weights are then bisected where neighboring solutions
 * jump in rate. Non-zero-mean families additionally solve at every weight used by `seeds`,
 * starting from the seed solutions there when they are feasible for `family`.
 */
RPCurve sweep_rp(Family family, const FreqChannel &ch, const DiodeModel &diode, double p_a, const SweepConfig &cfg,
                 std::span<const RPCurve> seeds = {});

/// Runs the requested families. ANG is seeded from every other non-zero-mean or zero-mean curve.
std::vector<RPCurve> sweep_families(std::span<const Family> families, const FreqChannel &ch, const DiodeModel &diode,
                                    double p_a, const SweepConfig &cfg);

/**
 * Rate-optimal allocation under the linear harvester for weight lambda2 on sum |h_l|^2 P_l:
 *   P_lr = P_li = (level / (1 - lambda2 |h_l|^2 / lambda1) - 1/a_l)^+,
 * parameterized here by ratio = lambda2 / lambda1 in [0, 1/max|h|^2).
 */
GaussianInput linear_weighted_allocation(const FreqChannel &ch, double p_a, double ratio, double *lambda1 = nullptr);

/// Removes dominated points; result sorted by p_dc descending with strictly increasing rate.
std::vector<RPPoint> pareto_filter(std::vector<RPPoint> points);

/// Upper concave envelope of a filtered curve (points reachable by time sharing), same ordering.
std::vector<RPPoint> upper_envelope(const std::vector<RPPoint> &points);

/**
 * Best p_dc at `rate`, linear between neighboring vertices of the upper envelope. Rates below
 * the curve's lowest-rate point return its p_dc; rates above the largest return NaN.
 */
double interpolate_pdc(const RPCurve &curve, double rate);

/// `count` interior abscissae evenly spread over (0, min over curves of the largest rate).
RVec matched_rate_grid(std::span<const RPCurve> curves, int count = 20);

enum class NSweepNormalization
{
    UnitGain,    ///< |h_l| = 1 on every subcarrier
    EqualEnergy, ///< sum |h_l|^2 = reference_energy for every N
};

struct NSweepConfig
{
    SweepConfig sweep;
    NSweepNormalization normalization = NSweepNormalization::UnitGain;
    double reference_energy = 9.0;
    double sigma_w2 = 0.1;
};

/// One ANG curve per N on a flat channel normalized as configured. Throws EvenN.
std::vector<RPCurve> n_sweep_experiment(std::span<const int> n_list, const DiodeModel &diode, double p_a,
                                        const NSweepConfig &cfg);

double max_pdc(const RPCurve &curve);

struct PhaseReport
{
    int n = 0;
    CVec mu;           ///< optimized means, rotated so the centre subcarrier has phase 0
    double p_dc = 0.0;
    RVec phases;       ///< phases ordered by centered frequency index
    RVec gaps;         ///< consecutive differences, wrapped to (-pi, pi]
    double spacing = 0.0;       ///< circular mean of the gaps
    double max_deviation = 0.0; ///< largest |gap - spacing|, wrapped
};

/// WPT optimum on unit-gain flat channels and the spacing of its mean phases. Throws EvenN.
std::vector<PhaseReport> flat_channel_wpt_experiment(std::span<const int> n_list, double p_a, const DiodeModel &diode,
                                                     const OptConfig &cfg, double sigma_w2 = 0.1);

} // namespace nlswipt

#endif

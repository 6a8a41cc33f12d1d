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

#ifndef NLSWIPT_LOCAL_SOLVER_HPP
#define NLSWIPT_LOCAL_SOLVER_HPP

#include "nlswipt/power_model.hpp"

#include <vector>

namespace nlswipt::detail
{

enum class Layout
{
    Wpt,        ///< z = [mu_r, mu_i]; deterministic delivered power only
    ZeroMean,   ///< z = [s_r, s_i]
    Symmetric,  ///< z = [mu_r, mu_i, s], s shared by both components
    Asymmetric, ///< z = [mu_r, mu_i, s_r, s_i]
};

/**
 * Weighted objective rate(s) + lambda2 f_ib in mean/variance coordinates, where
 * P = mu^2 + s. The power budget reads sum mu^2 + w sum s = p_a with w = 2 for the
 * symmetric layout, and the only inequalities are s >= 0. Scaling mu by k and s by k^2
 * maps the budget surface onto itself, which gives an exact retraction.
 */
class Problem
{
public:
    Problem(Layout layout, const PowerCoeffs &coeffs, const RateConstants *rc, double lambda2, double p_a);

    std::size_t n() const noexcept { return n_; }
    std::size_t dim() const noexcept { return n_mean() + n_var(); }
    std::size_t n_mean() const noexcept { return layout_ == Layout::ZeroMean ? 0 : 2 * n_; }
    std::size_t n_var() const noexcept;
    bool is_var(std::size_t i) const noexcept { return i >= n_mean(); }
    double weight() const noexcept { return layout_ == Layout::Symmetric ? 2.0 : 1.0; }
    double p_a() const noexcept { return p_a_; }
    Layout layout() const noexcept { return layout_; }

    GaussianInput to_input(const RVec &z) const;
    RVec from_input(const GaussianInput &input) const;

    double value(const RVec &z) const;
    RVec gradient(const RVec &z) const;
    double rate_part(const RVec &z) const;
    double power_part(const RVec &z) const;

    /// Hessian restricted to `idx` (rows and columns), f_ib by central differences of its gradient, rate exact.
    std::vector<RVec> hessian(const RVec &z, const std::vector<std::size_t> &idx) const;

    double constraint(const RVec &z) const;
    RVec constraint_normal(const RVec &z) const;

    /// Clip variances at zero and rescale onto the budget. False if nothing is left to scale.
    bool retract(RVec &z) const;

private:
    RVec power_gradient(const RVec &z) const;
    double rate_slope(std::size_t l, double s) const;

    Layout layout_;
    const PowerCoeffs *coeffs_;
    const RateConstants *rc_;
    double lambda2_;
    double p_a_;
    std::size_t n_;
};

struct Stationarity
{
    double nu = 0.0;       ///< least-squares multiplier of the budget
    double residual = 0.0; ///< projected-gradient max-norm over max(1, |nu|)
    std::vector<char> free;
    RVec direction;
};

Stationarity analyze(const Problem &pb, const RVec &z, const RVec &g);

struct LocalOptions
{
    int max_iters = 20000;
    double tol = 1e-8;
};

struct LocalResult
{
    RVec z;
    double value = 0.0;
    Stationarity stationarity;
    int iterations = 0;
    bool converged = false;
};

/// Projected-gradient ascent on the budget surface with a Newton polish on the active face.
LocalResult local_solve(const Problem &pb, RVec z, const LocalOptions &opt);

} // namespace nlswipt::detail

#endif

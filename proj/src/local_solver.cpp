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

#include "local_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlswipt::detail
{

namespace
{

double dot(const RVec &a, const RVec &b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double max_abs(const RVec &a)
{
    double m = 0.0;
    for (double v : a)
        m = std::max(m, std::abs(v));
    return m;
}

} // namespace

Problem::Problem(Layout layout, const PowerCoeffs &coeffs, const RateConstants *rc, double lambda2, double p_a)
    : layout_(layout), coeffs_(&coeffs), rc_(rc), lambda2_(lambda2), p_a_(p_a), n_(static_cast<std::size_t>(coeffs.n))
{
    if (layout != Layout::Wpt && rc == nullptr)
        throw Error(ErrorCode::InvalidArgument, "rate constants are required for the weighted objective");
}

std::size_t Problem::n_var() const noexcept
{
    switch (layout_)
    {
    case Layout::Wpt: return 0;
    case Layout::Symmetric: return n_;
    default: return 2 * n_;
    }
}

GaussianInput Problem::to_input(const RVec &z) const
{
    GaussianInput in = GaussianInput::zeros(n_);
    if (n_mean() > 0)
    {
        for (std::size_t l = 0; l < n_; ++l)
        {
            in.mu_r[l] = z[l];
            in.mu_i[l] = z[n_ + l];
        }
    }
    const std::size_t o = n_mean();
    for (std::size_t l = 0; l < n_; ++l)
    {
        double s_r = 0.0, s_i = 0.0;
        if (layout_ == Layout::Symmetric)
            s_r = s_i = z[o + l];
        else if (layout_ != Layout::Wpt)
        {
            s_r = z[o + l];
            s_i = z[o + n_ + l];
        }
        in.p_r[l] = in.mu_r[l] * in.mu_r[l] + s_r;
        in.p_i[l] = in.mu_i[l] * in.mu_i[l] + s_i;
    }
    return in;
}

RVec Problem::from_input(const GaussianInput &in) const
{
    RVec z(dim(), 0.0);
    if (n_mean() > 0)
    {
        for (std::size_t l = 0; l < n_; ++l)
        {
            z[l] = in.mu_r[l];
            z[n_ + l] = in.mu_i[l];
        }
    }
    const std::size_t o = n_mean();
    for (std::size_t l = 0; l < n_; ++l)
    {
        const double s_r = std::max(0.0, layout_ == Layout::ZeroMean ? in.p_r[l] : in.var_r(l));
        const double s_i = std::max(0.0, layout_ == Layout::ZeroMean ? in.p_i[l] : in.var_i(l));
        if (layout_ == Layout::Symmetric)
            z[o + l] = 0.5 * (s_r + s_i);
        else if (layout_ != Layout::Wpt)
        {
            z[o + l] = s_r;
            z[o + n_ + l] = s_i;
        }
    }
    return z;
}

double Problem::rate_part(const RVec &z) const
{
    if (layout_ == Layout::Wpt)
        return 0.0;
    const std::size_t o = n_mean();
    double acc = 0.0;
    for (std::size_t i = o; i < dim(); ++i)
        acc += std::log1p(rc_->a[(i - o) % n_] * z[i]);
    return rc_->c1 * weight() * acc;
}

double Problem::power_part(const RVec &z) const { return delivered_power_unchecked(to_input(z), *coeffs_); }

double Problem::value(const RVec &z) const
{
    if (layout_ == Layout::Wpt)
        return power_part(z);
    const double r = rate_part(z);
    return lambda2_ == 0.0 ? r : r + lambda2_ * power_part(z);
}

double Problem::rate_slope(std::size_t l, double s) const { return rc_->c1 * rc_->a[l] / (1.0 + rc_->a[l] * s); }

RVec Problem::power_gradient(const RVec &z) const
{
    const GaussianInput in = to_input(z);
    const InputGradient g = grad_f_ib_unchecked(in, *coeffs_);
    RVec out(dim(), 0.0);
    if (n_mean() > 0)
    {
        for (std::size_t l = 0; l < n_; ++l)
        {
            out[l] = g.mu_r[l] + 2.0 * in.mu_r[l] * g.p_r[l];
            out[n_ + l] = g.mu_i[l] + 2.0 * in.mu_i[l] * g.p_i[l];
        }
    }
    const std::size_t o = n_mean();
    for (std::size_t l = 0; l < n_; ++l)
    {
        if (layout_ == Layout::Symmetric)
            out[o + l] = g.p_r[l] + g.p_i[l];
        else if (layout_ != Layout::Wpt)
        {
            out[o + l] = g.p_r[l];
            out[o + n_ + l] = g.p_i[l];
        }
    }
    return out;
}

RVec Problem::gradient(const RVec &z) const
{
    if (layout_ == Layout::Wpt)
        return power_gradient(z);
    RVec g(dim(), 0.0);
    if (lambda2_ != 0.0)
    {
        g = power_gradient(z);
        for (double &v : g)
            v *= lambda2_;
    }
    const std::size_t o = n_mean();
    for (std::size_t i = o; i < dim(); ++i)
        g[i] += weight() * rate_slope((i - o) % n_, z[i]);
    return g;
}

std::vector<RVec> Problem::hessian(const RVec &z, const std::vector<std::size_t> &idx) const
{
    const std::size_t m = idx.size();
    std::vector<RVec> h(m, RVec(m, 0.0));
    const double scale = layout_ == Layout::Wpt ? 1.0 : lambda2_;
    if (scale != 0.0)
    {
        for (std::size_t c = 0; c < m; ++c)
        {
            const std::size_t j = idx[c];
            const double step = 1e-5 * std::max(1.0, std::abs(z[j]));
            RVec zp = z, zm = z;
            zp[j] += step;
            zm[j] -= step;
            const RVec gp = power_gradient(zp);
            const RVec gm = power_gradient(zm);
            for (std::size_t r = 0; r < m; ++r)
                h[r][c] = scale * (gp[idx[r]] - gm[idx[r]]) / (2.0 * step);
        }
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = r + 1; c < m; ++c)
                h[r][c] = h[c][r] = 0.5 * (h[r][c] + h[c][r]);
    }
    if (layout_ != Layout::Wpt)
    {
        for (std::size_t r = 0; r < m; ++r)
        {
            const std::size_t i = idx[r];
            if (!is_var(i))
                continue;
            const double a = rc_->a[(i - n_mean()) % n_];
            const double d = 1.0 + a * z[i];
            h[r][r] -= weight() * rc_->c1 * a * a / (d * d);
        }
    }
    return h;
}

double Problem::constraint(const RVec &z) const
{
    double c = 0.0;
    for (std::size_t i = 0; i < dim(); ++i)
        c += is_var(i) ? weight() * z[i] : z[i] * z[i];
    return c;
}

RVec Problem::constraint_normal(const RVec &z) const
{
    RVec nrm(dim());
    for (std::size_t i = 0; i < dim(); ++i)
        nrm[i] = is_var(i) ? weight() : 2.0 * z[i];
    return nrm;
}

bool Problem::retract(RVec &z) const
{
    for (std::size_t i = n_mean(); i < dim(); ++i)
        if (!(z[i] > 0.0))
            z[i] = 0.0;
    const double c = constraint(z);
    if (!(c > 0.0) || !std::isfinite(c))
        return false;
    const double k = std::sqrt(p_a_ / c);
    for (std::size_t i = 0; i < dim(); ++i)
        z[i] *= is_var(i) ? k * k : k;
    return true;
}

Stationarity analyze(const Problem &pb, const RVec &z, const RVec &g)
{
    const std::size_t d = pb.dim();
    const RVec nrm = pb.constraint_normal(z);
    Stationarity st;
    st.free.assign(d, 1);
    for (std::size_t i = pb.n_mean(); i < d; ++i)
        st.free[i] = z[i] > 0.0;

    for (std::size_t round = 0; round <= d; ++round)
    {
        double gn = 0.0, nn = 0.0;
        for (std::size_t i = 0; i < d; ++i)
        {
            if (st.free[i])
            {
                gn += g[i] * nrm[i];
                nn += nrm[i] * nrm[i];
            }
        }
        st.nu = nn > 0.0 ? gn / nn : 0.0;

        // Release the bound component that most wants to grow, one at a time.
        std::size_t worst = d;
        double worst_v = 0.0;
        for (std::size_t i = pb.n_mean(); i < d; ++i)
        {
            const double v = g[i] - st.nu * nrm[i];
            if (!st.free[i] && v > worst_v)
            {
                worst_v = v;
                worst = i;
            }
        }
        if (worst == d)
            break;
        st.free[worst] = 1;
    }

    st.direction.assign(d, 0.0);
    double res = 0.0;
    for (std::size_t i = 0; i < d; ++i)
    {
        const double v = g[i] - st.nu * nrm[i];
        if (st.free[i])
        {
            st.direction[i] = v;
            res = std::max(res, std::abs(v));
        }
        else
        {
            res = std::max(res, std::max(0.0, v));
        }
    }
    st.residual = res / std::max(1.0, std::abs(st.nu));
    return st;
}

namespace
{

struct Iterate
{
    RVec z;
    RVec g;
    double value = 0.0;
    Stationarity st;
};

Iterate make_iterate(const Problem &pb, RVec z)
{
    Iterate it;
    it.g = pb.gradient(z);
    it.value = pb.value(z);
    it.st = analyze(pb, z, it.g);
    it.z = std::move(z);
    return it;
}

// Newton step for the reduced (tangent-space) Hessian of the Lagrangian on the current face.
bool newton_step(const Problem &pb, Iterate &cur)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pb.dim(); ++i)
        if (cur.st.free[i])
            idx.push_back(i);
    const std::size_t m = idx.size();
    if (m < 2)
        return false;

    const RVec nrm = pb.constraint_normal(cur.z);
    Eigen::VectorXd nf(m), rf(m);
    for (std::size_t r = 0; r < m; ++r)
    {
        nf[r] = nrm[idx[r]];
        rf[r] = cur.st.direction[idx[r]];
    }
    if (nf.norm() == 0.0)
        return false;

    const auto h = pb.hessian(cur.z, idx);
    Eigen::MatrixXd hl(m, m);
    for (std::size_t r = 0; r < m; ++r)
    {
        for (std::size_t c = 0; c < m; ++c)
            hl(r, c) = h[r][c];
        if (!pb.is_var(idx[r]))
            hl(r, r) -= 2.0 * cur.st.nu;
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(nf);
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd basis = q.rightCols(m - 1);
    const Eigen::MatrixXd reduced = basis.transpose() * hl * basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (reduced + reduced.transpose()));
    const Eigen::VectorXd &ev = eig.eigenvalues();
    const double big = std::max(1.0, ev.cwiseAbs().maxCoeff());
    const double thr = 1e-8 * big;
    if (ev.maxCoeff() > thr)
        return false; // not a local maximum on this face; keep ascending

    const Eigen::VectorXd rt = basis.transpose() * rf;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(m - 1);
    for (Eigen::Index k = 0; k < ev.size(); ++k)
    {
        if (ev[k] < -thr)
        {
            const Eigen::VectorXd v = eig.eigenvectors().col(k);
            p -= (v.dot(rt) / ev[k]) * v;
        }
    }
    const Eigen::VectorXd dz = basis * p;

    const double floor = cur.value - 1e-12 * std::max(1.0, std::abs(cur.value));
    for (double damp : {1.0, 0.5, 0.25})
    {
        RVec z = cur.z;
        for (std::size_t r = 0; r < m; ++r)
            z[idx[r]] += damp * dz[static_cast<Eigen::Index>(r)];
        if (!pb.retract(z))
            continue;
        Iterate next = make_iterate(pb, std::move(z));
        if (next.value >= floor && next.st.residual < cur.st.residual)
        {
            cur = std::move(next);
            return true;
        }
    }
    return false;
}

} // namespace

LocalResult local_solve(const Problem &pb, RVec z0, const LocalOptions &opt)
{
    if (z0.size() != pb.dim())
        throw Error(ErrorCode::DimensionMismatch, "start point has the wrong dimension");
    if (!pb.retract(z0))
        throw Error(ErrorCode::InfeasibleStart, "start point carries no power");

    Iterate cur = make_iterate(pb, std::move(z0));
    const double scale = std::sqrt(pb.p_a());
    double t = 0.1 * scale / std::max(max_abs(cur.st.direction), 1e-300);
    int next_newton = 0;
    int it = 0;
    bool converged = false;

    for (; it < opt.max_iters; ++it)
    {
        if (cur.st.residual <= opt.tol)
        {
            converged = true;
            break;
        }
        if (cur.st.residual < 1e-3 && it >= next_newton)
        {
            if (newton_step(pb, cur))
                continue;
            next_newton = it + 25;
        }

        bool accepted = false;
        Iterate trial;
        for (int bt = 0; bt < 80; ++bt)
        {
            RVec z = cur.z;
            for (std::size_t i = 0; i < z.size(); ++i)
                z[i] += t * cur.st.direction[i];
            if (pb.retract(z))
            {
                const double v = pb.value(z);
                RVec dz(z.size());
                for (std::size_t i = 0; i < z.size(); ++i)
                    dz[i] = z[i] - cur.z[i];
                if (v >= cur.value + 1e-4 * dot(cur.g, dz) && v >= cur.value)
                {
                    trial = make_iterate(pb, std::move(z));
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if (!accepted)
        {
            // Line search exhausted by rounding; only a Newton step can still make progress.
            if (newton_step(pb, cur))
            {
                t = 0.1 * scale / std::max(max_abs(cur.st.direction), 1e-300);
                continue;
            }
            break;
        }

        RVec s(cur.z.size()), y(cur.z.size());
        for (std::size_t i = 0; i < s.size(); ++i)
        {
            s[i] = trial.z[i] - cur.z[i];
            y[i] = trial.st.direction[i] - cur.st.direction[i];
        }
        const double sy = dot(s, y);
        t = sy < 0.0 ? dot(s, s) / -sy : 2.0 * t;
        t = std::clamp(t, 1e-14, 1e8);
        cur = std::move(trial);
    }
    if (!converged && cur.st.residual <= opt.tol)
        converged = true;

    LocalResult out;
    out.value = cur.value;
    out.stationarity = std::move(cur.st);
    out.z = std::move(cur.z);
    out.iterations = it;
    out.converged = converged;
    return out;
}

} // namespace nlswipt::detail

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

#include "nlswipt/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nlswipt
{

namespace
{

constexpr std::uint64_t kBlockDomain = hash_name("oracle/block");
constexpr std::uint64_t kMomentDomain = hash_name("oracle/moments");

/// Streaming mean and second central moment; batches merge in index order.
struct Accumulator
{
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x)
    {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }

    void merge(const Accumulator &o)
    {
        if (o.n == 0.0)
            return;
        const double total = n + o.n;
        const double d = o.mean - mean;
        mean += d * o.n / total;
        m2 += o.m2 + d * d * n * o.n / total;
        n = total;
    }

    double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
    double std_error() const { return n > 0.0 ? std::sqrt(variance() / n) : 0.0; }
};

void check_oracle_config(const OracleConfig &cfg)
{
    if (cfg.n_blocks < 1)
        throw Error(ErrorCode::InvalidArgument, "n_blocks must be at least 1", "oracle.n_blocks");
    if (cfg.batch < 1)
        throw Error(ErrorCode::InvalidArgument, "batch must be at least 1", "oracle.batch");
}

} // namespace

CVec sample_block(const GaussianInput &input, CounterRng &rng)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    CVec v(input.size());
    for (std::size_t l = 0; l < input.size(); ++l)
    {
        const double sr = std::sqrt(std::max(0.0, input.var_r(l)));
        const double si = std::sqrt(std::max(0.0, input.var_i(l)));
        const double zr = nd(rng), zi = nd(rng);
        v[l] = cplx(input.mu_r[l] + sr * zr, input.mu_i[l] + si * zi);
    }
    return v;
}

ReceivedBlock simulate_received(std::span<const cplx> v, const FreqChannel &ch, CounterRng &rng, const UnitaryDft &dft)
{
    const std::size_t n = ch.size();
    if (v.size() != n || dft.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "symbol block length does not match the channel");
    std::normal_distribution<double> nd(0.0, 1.0);
    const double s = std::sqrt(ch.sigma_w2 / 2.0);
    CVec y(n), y_half(n);
    for (std::size_t l = 0; l < n; ++l)
    {
        const double wr = nd(rng), wi = nd(rng), ur = nd(rng), ui = nd(rng);
        y[l] = ch.h[l] * v[l] + s * cplx(wr, wi);
        y_half[l] = ch.h_u[l] * v[l] + s * cplx(ur, ui);
    }
    ReceivedBlock out{CVec(n), CVec(n)};
    dft.inverse(y, out.y);
    dft.inverse(y_half, out.y_half);
    return out;
}

ReceivedBlock simulate_received(std::span<const cplx> v, const FreqChannel &ch, CounterRng &rng)
{
    return simulate_received(v, ch, rng, UnitaryDft(ch.size()));
}

double block_pdc(const ReceivedBlock &block, const DiodeModel &diode)
{
    double second = 0.0, fourth = 0.0;
    for (std::size_t i = 0; i < block.y.size(); ++i)
    {
        const double a = std::norm(block.y[i]);
        const double b = std::norm(block.y_half[i]);
        second += a;
        fourth += a * a + b * b;
    }
    return diode.k2 * second + 0.75 * diode.k4 * fourth;
}

OracleEstimate estimate_pdc(const GaussianInput &input, const FreqChannel &ch, const DiodeModel &diode,
                            const OracleConfig &cfg)
{
    validate(input);
    validate(diode);
    check_oracle_config(cfg);
    if (input.size() != ch.size())
        throw Error(ErrorCode::DimensionMismatch, "input and channel lengths differ");

    const UnitaryDft dft(ch.size());
    const std::uint64_t batches = (cfg.n_blocks + cfg.batch - 1) / cfg.batch;
    std::vector<Accumulator> partial(batches);
    parallel_for(batches, [&](std::size_t b) {
        const std::uint64_t first = b * cfg.batch;
        const std::uint64_t last = std::min(cfg.n_blocks, first + cfg.batch);
        Accumulator acc;
        for (std::uint64_t blk = first; blk < last; ++blk)
        {
            CounterRng rng = indexed_stream(cfg.seed, kBlockDomain, blk);
            const CVec v = sample_block(input, rng);
            acc.add(block_pdc(simulate_received(v, ch, rng, dft), diode));
        }
        partial[b] = acc;
    });

    Accumulator total;
    for (const auto &p : partial)
        total.merge(p);
    return {total.mean, total.std_error(), cfg.n_blocks};
}

MomentReport check_moment_identities(const GaussianInput &input, std::uint64_t n_samples, std::uint64_t seed)
{
    validate(input);
    if (n_samples < 2)
        throw Error(ErrorCode::InvalidArgument, "need at least two samples", "n_samples");

    const std::size_t n = input.size();
    constexpr std::size_t kQuantities = 6;
    constexpr std::uint64_t kBatch = 8192;
    const std::uint64_t batches = (n_samples + kBatch - 1) / kBatch;

    // partial[b][l * kSlots + q]
    constexpr std::size_t kSlots = kQuantities;
    std::vector<std::vector<Accumulator>> partial(batches);
    parallel_for(batches, [&](std::size_t b) {
        std::vector<Accumulator> acc(n * kSlots);
        const std::uint64_t last = std::min(n_samples, (b + 1) * kBatch);
        for (std::uint64_t s = b * kBatch; s < last; ++s)
        {
            CounterRng rng = indexed_stream(seed, kMomentDomain, s);
            const CVec v = sample_block(input, rng);
            for (std::size_t l = 0; l < n; ++l)
            {
                const cplx x = v[l];
                const double p = std::norm(x);
                const cplx x2 = x * x;
                Accumulator *row = &acc[l * kSlots];
                row[0].add(x.real());
                row[1].add(x.imag());
                row[2].add(p);
                row[3].add(p * p);
                row[4].add(x2.real());
                row[5].add(x2.imag());
            }
        }
        partial[b] = std::move(acc);
    });

    std::vector<Accumulator> total(n * kSlots);
    for (const auto &p : partial)
        for (std::size_t i = 0; i < total.size(); ++i)
            total[i].merge(p[i]);

    const Moments closure = gaussian_moments(input);
    static const char *names[kQuantities] = {"mu_r", "mu_i", "P", "Q", "Pbar_re", "Pbar_im"};

    MomentReport report;
    report.sample_var_r.resize(n);
    report.sample_var_i.resize(n);
    for (std::size_t l = 0; l < n; ++l)
    {
        const double expected[kQuantities] = {closure.mu[l].real(), closure.mu[l].imag(), closure.p[l],
                                              closure.q[l],         closure.pbar[l].real(), closure.pbar[l].imag()};
        for (std::size_t q = 0; q < kQuantities; ++q)
        {
            const Accumulator &a = total[l * kSlots + q];
            MomentCheckRow row{l, names[q], expected[q], a.mean, a.std_error(), true};
            row.pass = std::abs(row.sample - row.closure) <= 4.0 * row.std_error + 1e-12 * (1.0 + std::abs(row.closure));
            report.pass = report.pass && row.pass;
            report.rows.push_back(std::move(row));
        }
        report.sample_var_r[l] = total[l * kSlots + 0].variance();
        report.sample_var_i[l] = total[l * kSlots + 1].variance();
    }
    return report;
}

} // namespace nlswipt

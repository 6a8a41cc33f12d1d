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
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace nlswipt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{

FreqChannel identity_channel(int n, double sigma_w2)
{
    FreqChannel ch;
    ch.n = n;
    ch.sigma_w2 = sigma_w2;
    ch.h.assign(n, cplx(1.0, 0.0));
    ch.h_u.assign(n, cplx(1.0, 0.0));
    return ch;
}

bool within_sigmas(const OracleEstimate &e, double target, double k)
{
    return std::abs(e.mean - target) <= k * e.std_error;
}

} // namespace

TEST_CASE("zero-variance symbols are returned exactly")
{
    const CVec mu{cplx(0.3, -0.2), cplx(-1.0, 0.5), cplx(0.0, 0.0)};
    CounterRng rng(42);
    CHECK(sample_block(GaussianInput::deterministic(mu), rng) == mu);
}

TEST_CASE("moment identities hold for a generic input")
{
    GaussianInput in = GaussianInput::zeros(1);
    in.mu_r[0] = 0.2;
    in.mu_i[0] = -0.7;
    in.p_r[0] = 0.04 + 0.3;
    in.p_i[0] = 0.49 + 0.05;
    const MomentReport r = check_moment_identities(in, 10'000'000, 1);
    for (const auto &row : r.rows)
    {
        INFO(row.quantity << " closure " << row.closure << " sample " << row.sample << " se " << row.std_error);
        CHECK(row.pass);
    }
    CHECK(r.pass);
}

TEST_CASE("moment identities for a second generic input")
{
    GaussianInput in = GaussianInput::zeros(1);
    in.mu_r[0] = 0.3;
    in.mu_i[0] = -0.4;
    in.p_r[0] = 0.09 + 0.5;
    in.p_i[0] = 0.16 + 0.2;
    CHECK(check_moment_identities(in, 1'000'000, 2).pass);
}

TEST_CASE("circularly symmetric input has vanishing pseudo-moment")
{
    const GaussianInput in = GaussianInput::zero_mean({0.4, 0.1}, {0.4, 0.1});
    const MomentReport r = check_moment_identities(in, 1'000'000, 3);
    CHECK(r.pass);
    for (const auto &row : r.rows)
        if (row.quantity.rfind("Pbar", 0) == 0)
            CHECK(row.closure == 0.0);
}

TEST_CASE("deterministic input has exactly zero sample variance")
{
    const CVec mu{cplx(0.5, 0.1), cplx(-0.3, 0.9)};
    const MomentReport r = check_moment_identities(GaussianInput::deterministic(mu), 10'000, 4);
    CHECK(r.pass);
    for (std::size_t l = 0; l < mu.size(); ++l)
    {
        CHECK(r.sample_var_r[l] == 0.0);
        CHECK(r.sample_var_i[l] == 0.0);
    }
}

TEST_CASE("noiseless identity channel returns the inverse transform twice")
{
    std::mt19937_64 gen(5);
    const CVec v = testing::random_cvec(gen, 5);
    CounterRng rng(1);
    const ReceivedBlock b = simulate_received(v, identity_channel(5, 0.0), rng);
    const CVec expected = UnitaryDft(5).inverse(v);
    for (int i = 0; i < 5; ++i)
    {
        CHECK_THAT(std::abs(b.y[i] - expected[i]), WithinAbs(0.0, 1e-15));
        CHECK_THAT(std::abs(b.y_half[i] - expected[i]), WithinAbs(0.0, 1e-15));
    }
}

TEST_CASE("a single active subcarrier has a flat envelope")
{
    CVec v(7, cplx(0.0, 0.0));
    v[0] = cplx(1.0, 0.0);
    CounterRng rng(1);
    const ReceivedBlock b = simulate_received(v, identity_channel(7, 0.0), rng);
    for (const auto &y : b.y)
        CHECK_THAT(std::abs(y), WithinRel(1.0 / std::sqrt(7.0), 1e-14));
}

TEST_CASE("received subcarrier power matches the second-moment identity")
{
    std::mt19937_64 gen(6);
    const int n = 3;
    const FreqChannel ch = testing::random_channel(gen, n, 0.2);
    const GaussianInput in = testing::random_input(gen, n, 1.5);
    const UnitaryDft dft(n);
    std::vector<RVec> samples(n);
    const std::uint64_t blocks = 1'000'000;
    RVec sum(n, 0.0), sum2(n, 0.0);
    for (std::uint64_t b = 0; b < blocks; ++b)
    {
        CounterRng rng = indexed_stream(9, 0, b);
        const CVec v = sample_block(in, rng);
        const CVec y = dft.forward(simulate_received(v, ch, rng, dft).y);
        for (int l = 0; l < n; ++l)
        {
            const double p = std::norm(y[l]);
            sum[l] += p;
            sum2[l] += p * p;
        }
    }
    for (int l = 0; l < n; ++l)
    {
        const double mean = sum[l] / blocks;
        const double se = std::sqrt((sum2[l] / blocks - mean * mean) / blocks);
        const double target = std::norm(ch.h[l]) * in.power(l) + ch.sigma_w2;
        CHECK(std::abs(mean - target) <= 4.0 * se);
    }
}

TEST_CASE("noise-only estimate matches the noise floor")
{
    const DiodeModel diode{1.0, 1.0};
    const FreqChannel ch = build_freq_channel(reference_channel_spec(0.1));
    const OracleEstimate e = estimate_pdc(GaussianInput::zeros(9), ch, diode, {200'000, 7, 4096});
    const double target = 9.0 * coefficients(ch, diode).eta;
    CHECK_THAT(target, WithinRel(1.17, 1e-14));
    INFO("estimate " << e.mean << " +- " << e.std_error);
    CHECK(within_sigmas(e, target, 3.0));
}

TEST_CASE("second-order diode estimate matches the linear sum")
{
    std::mt19937_64 gen(8);
    const DiodeModel diode{0.5, 0.0};
    const FreqChannel ch = build_freq_channel(reference_channel_spec(0.1));
    const GaussianInput in = testing::random_input(gen, 9);
    const OracleEstimate e = estimate_pdc(in, ch, diode, {200'000, 8, 4096});
    CHECK(within_sigmas(e, diode.k2 * delivered_power_linear(in, ch), 3.0));
}

TEST_CASE("estimate agrees with the closed form on a non-zero-mean input")
{
    std::mt19937_64 gen(10);
    const DiodeModel diode{};
    const FreqChannel ch = build_freq_channel(reference_channel_spec(0.1));
    const GaussianInput in = testing::random_input(gen, 9, 1.0);
    const OracleEstimate e = estimate_pdc(in, ch, diode, {300'000, 10, 4096});
    CHECK(within_sigmas(e, delivered_power(in, coefficients(ch, diode)), 3.0));
}

TEST_CASE("estimates replay bit-identically regardless of batching and threads")
{
    std::mt19937_64 gen(11);
    const FreqChannel ch = testing::random_channel(gen, 5, 0.1);
    const GaussianInput in = testing::random_input(gen, 5);
    const DiodeModel diode{};
    const OracleEstimate a = estimate_pdc(in, ch, diode, {20'000, 99, 1000});
    const OracleEstimate b = estimate_pdc(in, ch, diode, {20'000, 99, 1000});
    set_thread_count(4);
    const OracleEstimate c = estimate_pdc(in, ch, diode, {20'000, 99, 1000});
    set_thread_count(1);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.mean == c.mean);
    CHECK(a.std_error == c.std_error);

    const OracleEstimate other = estimate_pdc(in, ch, diode, {20'000, 100, 1000});
    CHECK(other.mean != a.mean);
}

TEST_CASE("standard error shrinks as the inverse square root of the block count")
{
    std::mt19937_64 gen(12);
    const FreqChannel ch = testing::random_channel(gen, 5, 0.1);
    const GaussianInput in = testing::random_input(gen, 5);
    const OracleEstimate small = estimate_pdc(in, ch, DiodeModel{}, {20'000, 1, 4096});
    const OracleEstimate large = estimate_pdc(in, ch, DiodeModel{}, {200'000, 1, 4096});
    CHECK_THAT(small.std_error / large.std_error, WithinRel(std::sqrt(10.0), 0.2));
}

TEST_CASE("oracle rejects bad configurations")
{
    const FreqChannel ch = flat_channel(3, 0.1);
    CHECK_THROWS_AS(estimate_pdc(GaussianInput::zeros(3), ch, DiodeModel{}, {0, 1, 1}), Error);
    CHECK_THROWS_AS(estimate_pdc(GaussianInput::zeros(5), ch, DiodeModel{}, {10, 1, 1}), Error);
}

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

#include "nlswipt/channel_model.hpp"
#include "nlswipt/dft.hpp"

#include <cmath>
#include <string>

namespace nlswipt
{

namespace
{

double sinc(double t)
{
    if (t == 0.0)
        return 1.0;
    return std::sin(kPi * t) / (kPi * t);
}

CVec phase_ramp(const CVec &h)
{
    const int n = static_cast<int>(h.size());
    CVec h_u(h.size());
    for (int l = 0; l < n; ++l)
        h_u[l] = h[l] * std::polar(1.0, kPi * centered_index(l, n) / n);
    return h_u;
}

} // namespace

ChannelSpec validate_spec(const ChannelSpec &spec)
{
    if (spec.n % 2 == 0)
        throw Error(ErrorCode::EvenN, "subcarrier count must be odd, got " + std::to_string(spec.n), "channel.N");
    if (spec.n < 3)
        throw Error(ErrorCode::TooFewSubcarriers, "subcarrier count must be at least 3", "channel.N");
    if (!(spec.f_w > 0.0))
        throw Error(ErrorCode::NonPositiveBandwidth, "bandwidth f_w must be positive", "channel.f_w");
    if (!(spec.sigma_w2 >= 0.0))
        throw Error(ErrorCode::NegativeNoise, "noise variance must be nonnegative", "channel.sigma_w2");

    if (spec.mode == ChannelMode::TimeTaps)
    {
        if (spec.taps.empty() || spec.taps.size() > static_cast<std::size_t>(spec.n))
            throw Error(ErrorCode::BadLength,
                        "tap count " + std::to_string(spec.taps.size()) + " must be in [1, N=" + std::to_string(spec.n) + "]",
                        "channel.taps");
        if (spec.sinc_window != 0 && spec.sinc_window < spec.n)
            throw Error(ErrorCode::WindowTooSmall, "sinc_window must be >= N", "channel.sinc_window");
    }
    else if (spec.coeffs.size() != static_cast<std::size_t>(spec.n))
    {
        throw Error(ErrorCode::BadLength,
                    "expected " + std::to_string(spec.n) + " coefficients, got " + std::to_string(spec.coeffs.size()),
                    "channel.coeffs");
    }
    return spec;
}

CVec half_sample_taps(std::span<const cplx> taps, int n, int window)
{
    if (window < n)
        throw Error(ErrorCode::WindowTooSmall, "sinc_window must be >= N", "channel.sinc_window");
    CVec folded(static_cast<std::size_t>(n), cplx(0.0, 0.0));
    for (int l = -window; l <= window; ++l)
    {
        cplx acc(0.0, 0.0);
        for (std::size_t d = 0; d < taps.size(); ++d)
            acc += taps[d] * sinc(l + 0.5 - static_cast<double>(d));
        folded[((l % n) + n) % n] += acc;
    }
    return folded;
}

FreqChannel build_freq_channel(const ChannelSpec &raw)
{
    const ChannelSpec spec = validate_spec(raw);
    if (spec.mode == ChannelMode::FreqCoeffs)
        return channel_from_coeffs(spec.coeffs, spec.sigma_w2, spec.f_w);

    const UnitaryDft dft(static_cast<std::size_t>(spec.n));
    CVec extended(static_cast<std::size_t>(spec.n), cplx(0.0, 0.0));
    std::copy(spec.taps.begin(), spec.taps.end(), extended.begin());

    const int window = spec.sinc_window == 0 ? 8 * spec.n : spec.sinc_window;
    FreqChannel ch;
    ch.n = spec.n;
    ch.f_w = spec.f_w;
    ch.sigma_w2 = spec.sigma_w2;
    ch.h = dft.forward(extended);
    ch.h_u = dft.forward(half_sample_taps(spec.taps, spec.n, window));
    return ch;
}

FreqChannel channel_from_coeffs(CVec coeffs, double sigma_w2, double f_w)
{
    FreqChannel ch;
    ch.n = static_cast<int>(coeffs.size());
    ch.f_w = f_w;
    ch.sigma_w2 = sigma_w2;
    ch.h_u = phase_ramp(coeffs);
    ch.h = std::move(coeffs);
    return ch;
}

FreqChannel flat_channel(int n, double sigma_w2, double gain, double f_w)
{
    if (n < 1 || n % 2 == 0)
        throw Error(ErrorCode::EvenN, "flat channel needs an odd subcarrier count", "channel.N");
    return channel_from_coeffs(CVec(static_cast<std::size_t>(n), cplx(gain, 0.0)), sigma_w2, f_w);
}

ChannelSpec reference_channel_spec(double sigma_w2)
{
    ChannelSpec spec;
    spec.mode = ChannelMode::FreqCoeffs;
    spec.n = 9;
    spec.sigma_w2 = sigma_w2;
    spec.coeffs = {{-1.2, 0.1}, {-0.4, -1.3}, {-0.1, -1.6}, {0.6, -1.5}, {-1.35, -0.1},
                   {-1.1, 0.2}, {-0.9, -0.01}, {0.7, 0.1}, {0.65, 0.01}};
    return spec;
}

} // namespace nlswipt

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

#ifndef NLSWIPT_CHANNEL_MODEL_HPP
#define NLSWIPT_CHANNEL_MODEL_HPP

#include "nlswipt/types.hpp"

#include <span>

namespace nlswipt
{

enum class ChannelMode
{
    TimeTaps,   ///< physical taps, DFT'd to subcarrier responses
    FreqCoeffs, ///< subcarrier responses supplied directly
};

/// Physical description of the channel as read from a run configuration.
struct ChannelSpec
{
    ChannelMode mode = ChannelMode::FreqCoeffs;
    CVec taps;            ///< TimeTaps: L taps, L <= n
    CVec coeffs;          ///< FreqCoeffs: exactly n coefficients
    int n = 0;            ///< subcarrier count, odd, >= 3
    double f_w = 1.0;     ///< bandwidth (normalized units allowed)
    double sigma_w2 = 0.; ///< noise variance per subcarrier
    int sinc_window = 0;  ///< half-width of the half-sample interpolation; 0 selects 8n
};

/// Per-subcarrier responses at the information sampling instants (h) and half a sample later (h_u).
struct FreqChannel
{
    CVec h;
    CVec h_u;
    int n = 0;
    double f_w = 1.0;
    double sigma_w2 = 0.0;

    std::size_t size() const noexcept { return h.size(); }
};

/// Checks the invariants of `spec` and returns it unchanged. Throws nlswipt::Error.
ChannelSpec validate_spec(const ChannelSpec &spec);

/// Builds h and h_u from a validated spec (validation is repeated here).
FreqChannel build_freq_channel(const ChannelSpec &spec);

/**
 * Time-domain channel sampled half a sample after each tap instant,
 *   h^u[l] = sum_d taps[d] sinc(l + 1/2 - d),   l = -window..window,
 * folded modulo n onto n entries to model the periodic OFDM block.
 */
CVec half_sample_taps(std::span<const cplx> taps, int n, int window);

/// Centered frequency index: l for l <= (n-1)/2, l - n otherwise.
inline int centered_index(int l, int n) { return l <= (n - 1) / 2 ? l : l - n; }

/// Subcarrier responses given directly; h_u follows from a half-sample delay of the bandlimited interpolant.
FreqChannel channel_from_coeffs(CVec coeffs, double sigma_w2, double f_w = 1.0);

/// Flat channel with |h_l| = gain on every subcarrier. Accepts any odd n >= 1.
FreqChannel flat_channel(int n, double sigma_w2, double gain = 1.0, double f_w = 1.0);

/// The nine-subcarrier frequency-selective reference channel used by the experiments.
ChannelSpec reference_channel_spec(double sigma_w2 = 0.1);

} // namespace nlswipt

#endif

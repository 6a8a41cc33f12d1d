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

#ifndef NLSWIPT_MC_ORACLE_HPP
#define NLSWIPT_MC_ORACLE_HPP

#include "nlswipt/channel_model.hpp"
#include "nlswipt/dft.hpp"
#include "nlswipt/power_model.hpp"
#include "nlswipt/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nlswipt
{

struct OracleConfig
{
    std::uint64_t n_blocks = 1'000'000;
    std::uint64_t seed = 0;
    std::uint64_t batch = 4096; ///< blocks per accumulation batch (and per work item)
};

struct OracleEstimate
{
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n_blocks = 0;
};

/// One draw of the subcarrier symbols; real and imaginary parts are independent normals.
CVec sample_block(const GaussianInput &input, CounterRng &rng);

struct ReceivedBlock
{
    CVec y;      ///< time-domain samples at the information instants
    CVec y_half; ///< time-domain samples half a sample later
};

/// Y = h V + W and Y~ = h_u V + W~ with independent noise, both taken to the time domain.
ReceivedBlock simulate_received(std::span<const cplx> v, const FreqChannel &ch, CounterRng &rng);
ReceivedBlock simulate_received(std::span<const cplx> v, const FreqChannel &ch, CounterRng &rng, const UnitaryDft &dft);

/// Per-block harvested power k2 sum|y|^2 + (3/4) k4 sum(|y|^4 + |y_half|^4)
double block_pdc(const ReceivedBlock &block, const DiodeModel &diode);

/**
 * Monte Carlo estimate of the delivered power. Block b draws from the stream
 * (cfg.seed, b), so the estimate does not depend on batch scheduling or thread count.
 */
OracleEstimate estimate_pdc(const GaussianInput &input, const FreqChannel &ch, const DiodeModel &diode,
                            const OracleConfig &cfg);

struct MomentCheckRow
{
    std::size_t subcarrier = 0;
    std::string quantity; ///< mu_r, mu_i, P, Q, Pbar_re, Pbar_im
    double closure = 0.0;
    double sample = 0.0;
    double std_error = 0.0;
    bool pass = true;
};

struct MomentReport
{
    std::vector<MomentCheckRow> rows;
    RVec sample_var_r;
    RVec sample_var_i;
    bool pass = true;
};

/// Compares sample moments of n_samples draws against the Gaussian closures; a row fails beyond 4 standard errors.
MomentReport check_moment_identities(const GaussianInput &input, std::uint64_t n_samples, std::uint64_t seed);

} // namespace nlswipt

#endif

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

#ifndef NLSWIPT_DFT_HPP
#define NLSWIPT_DFT_HPP

#include "nlswipt/types.hpp"

#include <cstddef>
#include <span>

namespace nlswipt
{

/**
 * Unitary DFT of fixed (small, possibly odd) length:
 *   X_k = N^{-1/2} sum_n x[n] e^{-j 2 pi n k / N},   x[n] = N^{-1/2} sum_k X_k e^{+j 2 pi n k / N}.
 * Direct O(N^2) evaluation with a precomputed twiddle table; the subcarrier counts
 * handled here are tens at most.
 */
class UnitaryDft
{
public:
    explicit UnitaryDft(std::size_t n);

    std::size_t size() const noexcept { return n_; }

    void forward(std::span<const cplx> in, std::span<cplx> out) const;
    void inverse(std::span<const cplx> in, std::span<cplx> out) const;

    CVec forward(std::span<const cplx> in) const;
    CVec inverse(std::span<const cplx> in) const;

private:
    void apply(std::span<const cplx> in, std::span<cplx> out, bool conjugate) const;

    std::size_t n_;
    double scale_;
    CVec twiddle_; // e^{-j 2 pi r / N}, r = 0..N-1
};

} // namespace nlswipt

#endif

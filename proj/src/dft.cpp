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

#include "nlswipt/dft.hpp"

#include <cmath>

namespace nlswipt
{

UnitaryDft::UnitaryDft(std::size_t n) : n_(n), scale_(1.0 / std::sqrt(static_cast<double>(n))), twiddle_(n)
{
    if (n == 0)
        throw Error(ErrorCode::InvalidArgument, "DFT length must be positive");
    for (std::size_t r = 0; r < n; ++r)
        twiddle_[r] = std::polar(1.0, -2.0 * kPi * static_cast<double>(r) / static_cast<double>(n));
}

void UnitaryDft::apply(std::span<const cplx> in, std::span<cplx> out, bool conjugate) const
{
    if (in.size() != n_ || out.size() != n_)
        throw Error(ErrorCode::DimensionMismatch, "DFT input/output length mismatch");
    for (std::size_t k = 0; k < n_; ++k)
    {
        double re = 0.0, im = 0.0;
        std::size_t r = 0;
        for (std::size_t n = 0; n < n_; ++n)
        {
            const cplx w = conjugate ? std::conj(twiddle_[r]) : twiddle_[r];
            re += in[n].real() * w.real() - in[n].imag() * w.imag();
            im += in[n].real() * w.imag() + in[n].imag() * w.real();
            r += k;
            if (r >= n_)
                r -= n_;
        }
        out[k] = cplx(re * scale_, im * scale_);
    }
}

void UnitaryDft::forward(std::span<const cplx> in, std::span<cplx> out) const { apply(in, out, false); }
void UnitaryDft::inverse(std::span<const cplx> in, std::span<cplx> out) const { apply(in, out, true); }

CVec UnitaryDft::forward(std::span<const cplx> in) const
{
    CVec out(n_);
    apply(in, out, false);
    return out;
}

CVec UnitaryDft::inverse(std::span<const cplx> in) const
{
    CVec out(n_);
    apply(in, out, true);
    return out;
}

} // namespace nlswipt

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

#ifndef NLSWIPT_RNG_HPP
#define NLSWIPT_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string_view>

namespace nlswipt
{

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// FNV-1a hash of a stream name.
constexpr std::uint64_t hash_name(std::string_view name) noexcept
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : name)
    {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/**
 * Counter-based generator: output i is mix64(key + i * golden). Any stream can be
 * positioned without generating its predecessors, which is what makes per-block and
 * per-restart streams cheap and independent of scheduling.
 *
 * Satisfies UniformRandomBitGenerator, so it composes with <random> distributions.
 */
class CounterRng
{
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

/// Derive an independent stream from a root seed and a hierarchical name such as "wpt/restart/17".
CounterRng named_stream(std::uint64_t root_seed, std::string_view name);

/// Derive a stream from a root seed and a numeric index (used for Monte Carlo blocks).
CounterRng indexed_stream(std::uint64_t root_seed, std::uint64_t domain, std::uint64_t index);

/// Global worker count used by parallel loops; 0 or 1 means run inline.
void set_thread_count(unsigned threads);
unsigned thread_count();

/**
 * Run body(i) for i in [0, n). Work items are independent; callers store results by
 * index so the outcome does not depend on how items were scheduled.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

} // namespace nlswipt

#endif

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

#include "nlswipt/rng.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace nlswipt
{

namespace
{
std::atomic<unsigned> g_threads{1};
thread_local bool t_in_worker = false; // nested loops run inline on the calling worker
}

CounterRng named_stream(std::uint64_t root_seed, std::string_view name)
{
    return CounterRng(mix64(mix64(root_seed) ^ hash_name(name)));
}

CounterRng indexed_stream(std::uint64_t root_seed, std::uint64_t domain, std::uint64_t index)
{
    return CounterRng(mix64(mix64(mix64(root_seed) ^ domain) + index * 0xD1B54A32D192ED03ULL));
}

void set_thread_count(unsigned threads) { g_threads = std::max(1u, threads); }
unsigned thread_count() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body)
{
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(g_threads, n));
    if (workers <= 1 || t_in_worker)
    {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
    {
        pool.emplace_back([&] {
            t_in_worker = true;
            for (std::size_t i = next++; i < n; i = next++)
            {
                try
                {
                    body(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> guard(failure_lock);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    }
    for (auto &t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace nlswipt

// Copyright 2026 The lorentz-bg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "lorentz/stats.hpp"

namespace lorentz {

/// Worker count: the requested value, or the hardware concurrency for 0.
inline unsigned resolve_threads(unsigned requested)
{
    if (requested > 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for every i in [0, n) on `threads` workers pulling indices from
/// a shared counter. fn must write only to slots owned by i. If any call
/// throws, the exception of the lowest failing index is rethrown after all
/// workers stop, so the reported error does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn &&fn)
{
    threads = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex err_mu;
    std::exception_ptr err;
    std::size_t err_index = n;
    auto work = [&] {
        for (;;) {
            if (stop.load(std::memory_order_relaxed))
                return;
            std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (i < err_index) {
                    err_index = i;
                    err = std::current_exception();
                }
                stop = true;
            }
        }
    };
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(work);
        for (auto &t : pool)
            t.join();
    }
    if (err)
        std::rethrow_exception(err);
}

/// Ensemble reduction with a fixed shape: items are grouped in consecutive
/// blocks, each block is accumulated in index order by one worker, and the
/// blocks are merged pairwise. The result is independent of the thread count.
template <class Acc, class AddFn>
Acc parallel_reduce(std::size_t n, unsigned threads, AddFn &&add_item, std::size_t block_size = 64, Acc init = Acc{})
{
    std::size_t nb = (n + block_size - 1) / block_size;
    std::vector<Acc> blocks(nb, init);
    parallel_for(nb, threads, [&](std::size_t b) {
        for (std::size_t i = b * block_size; i < std::min(n, (b + 1) * block_size); ++i)
            add_item(blocks[b], i);
    });
    if (blocks.empty())
        return init;
    return stats::reduce_pairwise(std::move(blocks));
}

} // namespace lorentz

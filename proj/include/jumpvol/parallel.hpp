#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace jumpvol
{

// Worker count 0 means "use the hardware concurrency".
inline unsigned resolve_workers(unsigned workers) noexcept
{
    if (workers != 0)
        return workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

/*!
 * Call fn(i) for every i in [0, count) on up to \c workers threads.
 *
 * Indices are handed out dynamically, so fn must only write to per-index
 * slots; any ordering of the results is the caller's job. The first
 * exception thrown by fn is rethrown after all workers join.
 */
template<class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn)
{
    unsigned const nthreads
        = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), count));
    if (nthreads <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto body = [&] {
        while (!failed.load(std::memory_order_relaxed))
        {
            std::size_t const i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count)
                return;
            try
            {
                fn(i);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
                failed = true;
            }
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(nthreads);
        for (unsigned t = 0; t < nthreads; ++t)
            pool.emplace_back(body);
    }
    if (first_error)
        std::rethrow_exception(first_error);
}

}  // namespace jumpvol

#include "mcqa/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <thread>
#include <vector>

namespace mcqa {

std::size_t default_thread_count()
{
    if (const char* env = std::getenv("MCQA_THREADS")) {
        std::size_t value = 0;
        const auto* end = env + std::strlen(env);
        auto [ptr, ec] = std::from_chars(env, end, value);
        if (ec == std::errc() && ptr == end && value > 0)
            return value;
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::size_t resolve_threads(std::size_t requested)
{
    return requested == 0 ? default_thread_count() : requested;
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body)
{
    threads = std::min(resolve_threads(threads), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }

    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        const std::size_t block = (n + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t) {
            const std::size_t lo = t * block;
            const std::size_t hi = std::min(n, lo + block);
            workers.emplace_back([&, t, lo, hi] {
                try {
                    for (std::size_t i = lo; i < hi; ++i)
                        body(i);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace mcqa

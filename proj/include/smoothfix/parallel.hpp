#ifndef SMOOTHFIX_PARALLEL_HPP
#define SMOOTHFIX_PARALLEL_HPP

#include <cstddef>
#include <thread>
#include <vector>

namespace smoothfix {

/// Static chunking over [0, n). Each index is processed exactly once and the
/// caller writes into preallocated slots, so results do not depend on the
/// worker count. Exceptions from workers are rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t w = static_cast<std::size_t>(workers);
    if (w > n) w = n;
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(w);
    threads.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        threads.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < n; i += w) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace smoothfix

#endif

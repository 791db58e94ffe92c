#pragma once

// Order-stable fan-out: results land at their input index regardless of which
// worker computed them, so output never depends on the worker count.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "errors.hpp"

namespace splx {

/// Worker count: explicit request, else SPLX_NUM_WORKERS, else hardware threads.
inline std::size_t worker_count(std::size_t requested = 0) {
    if (requested > 0) { return requested; }
    if (const char *env = std::getenv("SPLX_NUM_WORKERS"); env != nullptr && *env != '\0') {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == nullptr || *end != '\0' || v <= 0) {
            throw ConfigError(std::string("SPLX_NUM_WORKERS must be a positive integer, got '") + env + "'");
        }
        return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// out[i] = fn(items[i]). The exception from the lowest failing index is
/// rethrown after all workers finish.
template<typename T, typename Fn>
auto parallel_map(const std::vector<T> &items, Fn fn, std::size_t workers)
    -> std::vector<std::invoke_result_t<Fn, const T &>> {
    using R = std::invoke_result_t<Fn, const T &>;
    const std::size_t n = items.size();
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(fn(items[i]));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(n, 1));
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t k = 0; k < threads; ++k) { pool.emplace_back(work); }
        for (auto &th : pool) { th.join(); }
    }
    for (const auto &e : errors) {
        if (e) { std::rethrow_exception(e); }
    }
    std::vector<R> out;
    out.reserve(n);
    for (auto &s : slots) { out.push_back(std::move(*s)); }
    return out;
}

}  // namespace splx

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gapspec/ltverify.hpp"

namespace gapspec {

// Worker count: hardware concurrency, capped by GAPSPEC_THREADS when set.
unsigned worker_threads();

// results[i] = fn(i); items are claimed in index order and results are stored
// by index, so output never depends on scheduling. The first exception (by
// index) is rethrown after all workers finish.
template <class R>
std::vector<R> parallel_map(std::size_t count, const std::function<R(std::size_t)>& fn, unsigned threads = 0) {
    if (threads == 0) threads = worker_threads();
    std::vector<std::optional<R>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                slots[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<R> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

struct SuiteOptions {
    std::uint64_t seed = 7;
    std::size_t n = 800;     // truncation for the eigenvalue suites
    unsigned threads = 0;    // 0: worker_threads()
};

struct SuiteResult {
    std::string name;
    std::string title;
    std::size_t total = 0;
    std::size_t passed = 0;
    double worst_ratio = 0.0;  // largest lhs/bound seen (or spread/limit for stability checks)
    double seconds = 0.0;
    std::vector<std::string> table;   // human-readable detail lines
    std::vector<BoundReport> reports; // verification suites only

    bool pass() const noexcept { return total > 0 && passed == total; }
};

// Names accepted by `gapspec reproduce`.
const std::vector<std::string>& reproducible_suites();
// Further checks used by the acceptance binary: oracles, normalization,
// stieltjes, rank_one, birman_schwinger, eigensolvers.
const std::vector<std::string>& auxiliary_checks();

// Throws ValidationError for an unknown name.
SuiteResult run_suite(const std::string& name, const SuiteOptions& opt = {});

}  // namespace gapspec

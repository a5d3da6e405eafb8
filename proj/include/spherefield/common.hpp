#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace spherefield {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct PoleProximityError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct ShapeMismatchError : Error { using Error::Error; };
struct ResolutionError : Error { using Error::Error; };
struct DegenerateRegionError : Error { using Error::Error; };
struct DegenerateWeightsError : Error { using Error::Error; };
struct BoundViolationError : Error { using Error::Error; };
struct VPlusViolationError : Error { using Error::Error; };
struct OverflowError : Error { using Error::Error; };
struct NonFiniteError : Error { using Error::Error; };

// SplitMix64 step, used to derive independent per-sample sub-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d4a96c39f7b0bdULL;
    return x ^ (x >> 31);
}

/// Seed for the i-th sub-stream of a run seeded with `seed`.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t i) {
    return splitmix64(seed ^ splitmix64(i + 1));
}

/// Runs fn(i) for i in [0, n). Results must be written to per-index slots so
/// the outcome is independent of the worker count; reductions happen after,
/// in index order.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (std::size_t w = 0; w < nw; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += nw) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace spherefield

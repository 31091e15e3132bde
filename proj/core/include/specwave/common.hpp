#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace specwave {

/// Scenario/config problems: wrong keys, missing files, invalid ranges.
/// The CLI maps this to exit code 2; everything else maps to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pointwise ellipticity failure; carries the offending grid index.
class EllipticityError : public std::runtime_error {
public:
    EllipticityError(const std::string& msg, std::ptrdiff_t grid_index)
        : std::runtime_error(msg), grid_index(grid_index) {}
    std::ptrdiff_t grid_index;
};

/// Coercivity failure (smallest Ritz value not positive).
class CoercivityError : public std::runtime_error {
public:
    CoercivityError(const std::string& msg, double lambda_min)
        : std::runtime_error(msg), lambda_min(lambda_min) {}
    double lambda_min;
};

/// Iterative process failed to converge (eigensolver, Newton, fixed point).
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A pointwise evaluation produced a non-finite value; carries grid index.
class NonFiniteError : public std::runtime_error {
public:
    NonFiniteError(const std::string& msg, std::ptrdiff_t grid_index)
        : std::runtime_error(msg), grid_index(grid_index) {}
    std::ptrdiff_t grid_index;
};

/// A verification step refused to emit a certificate (named reason inside).
class CertificateRefusal : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// Deterministic block-parallel loop: fn(i) for i in [0,n). Results must be
/// written to preallocated slots indexed by i, so the outcome is independent
/// of the thread count. threads<=1 runs inline.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < n; i += nt) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace specwave

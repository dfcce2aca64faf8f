#pragma once

// Shared plumbing: error types, deterministic RNG, hashing, tiny parallel_for.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace robustens {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input (config, dataset, CLI). Maps to exit code 2.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

class AllZeroWeights : public Error {
public:
    AllZeroWeights() : Error("weight matrix sums to zero; cannot normalize") {}
};

class ShapeMismatch : public Error {
public:
    explicit ShapeMismatch(const std::string& msg) : Error(msg) {}
};

class NonFiniteActivation : public Error {
public:
    explicit NonFiniteActivation(const std::string& msg) : Error(msg) {}
};

class EmptyText : public Error {
public:
    explicit EmptyText(const std::string& msg = "text is empty after trimming") : Error(msg) {}
};

class TooFewSamples : public Error {
public:
    explicit TooFewSamples(const std::string& msg) : Error(msg) {}
};

class EmptyRecordSet : public Error {
public:
    EmptyRecordSet() : Error("no adversarial records to score") {}
};

class InfeasibleMoments : public Error {
public:
    explicit InfeasibleMoments(const std::string& msg) : Error(msg) {}
};

class UnknownAttack : public ValidationError {
public:
    explicit UnknownAttack(const std::string& name)
        : ValidationError("unknown attack '" + name +
                          "'; valid names: char, word, sentence, multilevel") {}
};

class EndpointUnreachable : public Error {
public:
    explicit EndpointUnreachable(const std::string& msg) : Error(msg) {}
};

class MalformedResponse : public Error {
public:
    explicit MalformedResponse(const std::string& msg) : Error(msg) {}
};

// ---------------------------------------------------------------------------
// Hashing and seed derivation

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Chain-mix an arbitrary number of values into one seed; order-sensitive.
inline std::uint64_t derive_seed(std::uint64_t seed) { return splitmix64(seed); }

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t next, Rest... rest) {
    return derive_seed(splitmix64(seed ^ splitmix64(next)), rest...);
}

inline std::uint64_t derive_seed_str(std::uint64_t seed, std::string_view tag) {
    return splitmix64(seed ^ fnv1a64(tag));
}

// ---------------------------------------------------------------------------
// Deterministic RNG.
//
// All sampling is built on raw 64-bit draws from splitmix64 state so results
// are identical across standard libraries (std::*_distribution is
// implementation-defined).

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer in [0, n)
    std::size_t uniform_index(std::size_t n) {
        if (n <= 1) return 0;
        const std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
        std::uint64_t x = next_u64();
        while (x > bound) x = next_u64();
        return static_cast<std::size_t>(x % n);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Box-Muller; caches the second deviate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Marsaglia-Tsang; valid for any shape > 0.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = std::max(uniform01(), 1e-300);
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    void shuffle_indices(std::vector<std::size_t>& idx) {
        for (std::size_t i = idx.size(); i > 1; --i) {
            std::swap(idx[i - 1], idx[uniform_index(i)]);
        }
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Minimal fork-join over an index range. Results must be written to
// pre-sized slots so the outcome is independent of the thread count.

inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex err_mu;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline double clamp_probability(double p, double eps = 1e-7) {
    if (p < eps) return eps;
    if (p > 1.0 - eps) return 1.0 - eps;
    return p;
}

}  // namespace robustens

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace itra {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// A grayscale frame: rows = y, cols = x, intensities nominally in [0, 1].
using Frame = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct invalid_dictionary : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when an operation legitimately ran but produced nothing usable
// (e.g. every descriptor column was filtered out).
struct empty_result : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Seeding
//
// All randomness flows from one master seed. Stages derive their own seeds
// with split_seed(master, tag, index); the mixing is fixed here so that runs
// are reproducible across the whole pipeline.
// ---------------------------------------------------------------------------

constexpr std::uint64_t kSeedGamma = 0x9e3779b97f4a7c15ull;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += kSeedGamma;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t split_seed(std::uint64_t seed, std::string_view tag,
                                std::uint64_t index = 0) {
    return splitmix64(seed ^ splitmix64(fnv1a64(tag)) ^ splitmix64(index));
}

// mt19937_64 wrapper with explicit distributions. std::uniform_*_distribution
// is not pinned by the standard, so the draws are spelled out here to keep
// streams identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased draw in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw invalid_input("Rng::below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double real01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * real01(); }

    // Box-Muller, cached second deviate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = real01();
        while (u1 <= 0.0) u1 = real01();
        const double u2 = real01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // First k of a seeded Fisher-Yates shuffle of [0, n).
    std::vector<Index> sample_without_replacement(Index n, Index k) {
        std::vector<Index> idx(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (Index i = 0; i < k; ++i) {
            const Index j = i + static_cast<Index>(below(static_cast<std::uint64_t>(n - i)));
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
        idx.resize(static_cast<std::size_t>(k));
        return idx;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline void require_finite(const Matrix& a, const char* what) {
    if (!a.allFinite()) throw invalid_input(std::string(what) + ": non-finite entries");
}

}  // namespace itra

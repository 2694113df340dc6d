#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace skewlearn {

/// Base error; subclasses map to CLI exit codes (config=2, data=3, train=4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class TrainError : public Error {
public:
    using Error::Error;
};

/// splitmix64 finalizer; used to derive statistically independent seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derives a child seed from a base seed and a path of tags, e.g.
/// derive_seed(seed, {kSearch, candidate, fold}). Parallel workers seeded
/// this way produce results independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(base);
    for (std::uint64_t tag : path) {
        s = mix64(s ^ mix64(tag));
    }
    return s;
}

/// Stage tags for seed derivation. Values are arbitrary but frozen:
/// changing them changes every derived stream.
namespace seed_tag {
inline constexpr std::uint64_t holdout = 1;
inline constexpr std::uint64_t folds = 2;
inline constexpr std::uint64_t resample = 3;
inline constexpr std::uint64_t search_resample = 4;
inline constexpr std::uint64_t search_fit = 5;
inline constexpr std::uint64_t refit_resample = 6;
inline constexpr std::uint64_t refit_fit = 7;
inline constexpr std::uint64_t tree = 8;
inline constexpr std::uint64_t member = 9;
inline constexpr std::uint64_t round_ = 10;
inline constexpr std::uint64_t synth = 11;
inline constexpr std::uint64_t family_search = 12;
} // namespace seed_tag

/// Deterministic RNG wrapper. All draws go through explicit algorithms
/// (no std:: distributions) so sequences are fixed for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n); unbiased via rejection.
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw Error("uniform_index: n must be positive");
        const std::uint64_t un = n;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        std::uint64_t draw;
        do {
            draw = next();
        } while (draw >= limit);
        return static_cast<std::size_t>(draw % un);
    }

    /// Standard normal via Box-Muller; second value cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01(); // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_index(i)]);
        }
    }

    /// First k elements of a Fisher-Yates shuffle over 0..n-1, in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(idx[i], idx[i + uniform_index(n - i)]);
        }
        idx.resize(k);
        return idx;
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

} // namespace skewlearn

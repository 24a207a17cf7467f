#include "fedlab/weights.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "fedlab/errors.hpp"

namespace fedlab {

WeightVector::WeightVector(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw NumericError("WeightVector: non-finite element at index " + std::to_string(i));
        }
    }
}

double l1_norm(const WeightVector& w) {
    if (w.empty()) {
        throw DimensionError("l1_norm: empty vector");
    }
    double sum = 0.0;
    for (double x : w.values()) {
        sum += std::abs(x);
    }
    return sum;
}

double l2_norm(const WeightVector& w) {
    if (w.empty()) {
        throw DimensionError("l2_norm: empty vector");
    }
    double sum_sq = 0.0;
    for (double x : w.values()) {
        sum_sq += x * x;
    }
    return std::sqrt(sum_sq);
}

WeightVector axpy_combine(std::span<const double> coeffs,
                          std::span<const WeightVector> vectors) {
    if (coeffs.empty() || coeffs.size() != vectors.size()) {
        throw DimensionError("axpy_combine: need equally many coefficients and vectors, at least one");
    }
    const std::size_t length = vectors.front().size();
    for (const WeightVector& v : vectors) {
        if (v.size() != length) {
            throw DimensionError("axpy_combine: vectors differ in length");
        }
    }
    std::vector<double> out(length, 0.0);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const double c = coeffs[i];
        const std::vector<double>& v = vectors[i].values();
        for (std::size_t k = 0; k < length; ++k) {
            out[k] += c * v[k];
        }
    }
    for (double x : out) {
        if (!std::isfinite(x)) {
            throw NumericError("axpy_combine: non-finite result");
        }
    }
    return WeightVector(std::move(out));
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t SeededRng::next_u64() {
    return engine_();
}

double SeededRng::uniform() {
    // 53 high bits give a uniform double in [0, 1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t SeededRng::uniform_index(std::uint64_t n) {
    if (n == 0) {
        throw DimensionError("uniform_index: n must be positive");
    }
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) {
            return r % n;
        }
    }
}

bool SeededRng::bernoulli(double p) {
    return uniform() < p;
}

double SeededRng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_normal_ = radius * std::sin(theta);
    has_cached_normal_ = true;
    return radius * std::cos(theta);
}

SeededRng SeededRng::child(std::uint64_t index) const {
    return SeededRng(mix(seed_, index));
}

std::uint64_t SeededRng::mix(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

}  // namespace fedlab

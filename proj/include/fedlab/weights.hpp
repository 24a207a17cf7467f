#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fedlab {

/**
 * Flat ordered vector of finite model parameters.
 *
 * Construction rejects NaN/Inf, and instances are immutable afterwards, so a
 * WeightVector can be shared across threads for reading. All arithmetic over
 * weight vectors lives in free functions; layer structure is handled elsewhere.
 */
class WeightVector {
public:
    WeightVector() = default;

    // Throws NumericError if any element is non-finite.
    explicit WeightVector(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    std::span<const double> span() const { return values_; }

    bool operator==(const WeightVector& other) const = default;

private:
    std::vector<double> values_;
};

// Sum of absolute values. Throws DimensionError on an empty vector.
double l1_norm(const WeightVector& w);

// Euclidean norm. Throws DimensionError on an empty vector.
double l2_norm(const WeightVector& w);

// Elementwise linear combination sum_i coeffs[i] * vectors[i].
// Throws DimensionError on empty input or mismatched lengths,
// NumericError if the result is non-finite.
WeightVector axpy_combine(std::span<const double> coeffs,
                          std::span<const WeightVector> vectors);

/**
 * Deterministic seeded random stream.
 *
 * Distribution sampling is implemented on top of raw 64-bit draws rather than
 * the standard <random> distributions, so identical seeds produce identical
 * sequences on every platform and standard library.
 *
 * A stream is single-owner. Parallel workers each take an independent child
 * stream via child(i), with child_seed = mix(parent_seed, i); child streams
 * depend only on the parent seed and the index, never on the parent's
 * position in its own sequence.
 */
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    // Uniform double in [0, 1).
    double uniform();

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    // Uniform integer in [0, n), unbiased via rejection. n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n);

    bool bernoulli(double p);

    // Standard normal draw (Box-Muller; the paired value is cached).
    double normal();

    SeededRng child(std::uint64_t index) const;

    // SplitMix64 finalizer over (seed, index); the child-stream splitting rule.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t index);

private:
    std::uint64_t seed_ = 0;
    std::mt19937_64 engine_;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

}  // namespace fedlab

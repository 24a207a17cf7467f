#pragma once

#include <optional>
#include <utility>

#include "fedlab/weights.hpp"

namespace fedlab {

// Knobs shared by the weight-space metrics.
struct MetricConfig {
    // Target standard deviation the health score normalizes against.
    double sigma_target = 0.1;
    // Magnitude below which a coordinate counts as near zero for
    // Hamming-weight bookkeeping.
    double zero_tolerance = 1e-12;

    // Throws ConfigError when out of range.
    void validate() const;
};

// Training provenance carried alongside the metric triple.
struct TrainingMeta {
    std::optional<double> accuracy;
    std::optional<double> loss;
    int epochs_trained = 0;
    double learning_rate = 0.001;
    int batch_size = 32;
};

/**
 * Metadata record of one candidate model: the (sparsity, stability, health)
 * triple plus training provenance. Sparsity lies in [0,1], stability is at
 * most 1, health is at most 0.
 */
struct Genotype {
    double sparsity = 0.0;
    double stability = 1.0;
    double health = 0.0;
    // True when no previous checkpoint existed and stability defaulted to 1.
    bool stability_assumed = false;
    TrainingMeta training;
};

/// Normalized L1/L2 sparsity: (sqrt(L) - l1/l2) / (sqrt(L) - 1).
// 0 for all-equal-magnitude vectors, 1 for exactly one nonzero coordinate.
// Throws UndefinedMetric on a zero vector, DimensionError when L < 2.
double sparsity(const WeightVector& w);

// Population mean and standard deviation (divisor K, not K-1).
std::pair<double, double> weight_moments(const WeightVector& w);

// -( |mean|/sigma_target + |std - sigma_target|/sigma_target ).
// Always <= 0; equals 0 exactly when mean is 0 and std hits the target.
double weight_health(const WeightVector& w, const MetricConfig& cfg);

// 1 - ||curr - prev||_2 / ||prev||_2. Equals 1 iff the vectors are identical.
// Throws UndefinedMetric when prev is all zero, DimensionError on mismatch.
double stability(const WeightVector& w_curr, const WeightVector& w_prev);

// Assembles the full Genotype. When w_prev is absent, stability defaults to
// 1.0 and the record is flagged stability_assumed.
Genotype genotype_of(const WeightVector& w_curr,
                     const WeightVector* w_prev,
                     const MetricConfig& cfg,
                     const TrainingMeta& training);

}  // namespace fedlab

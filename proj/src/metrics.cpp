#include "fedlab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fedlab/errors.hpp"

namespace fedlab {

void MetricConfig::validate() const {
    if (!(sigma_target > 0.0) || !std::isfinite(sigma_target)) {
        throw ConfigError("MetricConfig: sigma_target must be positive");
    }
    if (zero_tolerance < 0.0 || !std::isfinite(zero_tolerance)) {
        throw ConfigError("MetricConfig: zero_tolerance must be non-negative");
    }
}

double sparsity(const WeightVector& w) {
    if (w.empty()) {
        throw DimensionError("sparsity: empty vector");
    }
    if (w.size() < 2) {
        throw DimensionError("sparsity: undefined for a single-element vector");
    }
    // Work on magnitudes scaled by the largest one. The ratio l1/l2 is scale-
    // free, so this changes nothing mathematically, but it keeps the sums in
    // range for extreme inputs and makes the equal-magnitude case exact: all
    // scaled entries are then exactly 1.0 and both sums below are integers.
    double max_mag = 0.0;
    for (double x : w.values()) {
        max_mag = std::max(max_mag, std::abs(x));
    }
    if (max_mag == 0.0) {
        throw UndefinedMetric("sparsity: undefined for the zero vector");
    }
    double l1 = 0.0;
    double l2_sq = 0.0;
    for (double x : w.values()) {
        const double u = std::abs(x) / max_mag;
        l1 += u;
        l2_sq += u * u;
    }
    const double n = static_cast<double>(w.size());
    // Cauchy-Schwarz equality (l1^2 == n * l2^2) holds exactly when every
    // magnitude is equal, which must score exactly 0.
    if (l1 * l1 == n * l2_sq) {
        return 0.0;
    }
    const double root_l = std::sqrt(n);
    const double value = (root_l - l1 / std::sqrt(l2_sq)) / (root_l - 1.0);
    // Clamp floating-point dust so the [0,1] bounds hold exactly.
    return std::clamp(value, 0.0, 1.0);
}

std::pair<double, double> weight_moments(const WeightVector& w) {
    if (w.empty()) {
        throw DimensionError("weight_moments: empty vector");
    }
    const double k = static_cast<double>(w.size());
    double mean = 0.0;
    for (double x : w.values()) {
        mean += x;
    }
    mean /= k;
    double var = 0.0;
    for (double x : w.values()) {
        const double d = x - mean;
        var += d * d;
    }
    var /= k;
    return {mean, std::sqrt(var)};
}

double weight_health(const WeightVector& w, const MetricConfig& cfg) {
    cfg.validate();
    const auto [mean, sd] = weight_moments(w);
    return -(std::abs(mean) / cfg.sigma_target +
             std::abs(sd - cfg.sigma_target) / cfg.sigma_target);
}

double stability(const WeightVector& w_curr, const WeightVector& w_prev) {
    if (w_curr.size() != w_prev.size()) {
        throw DimensionError("stability: checkpoint lengths differ");
    }
    const double prev_norm = l2_norm(w_prev);
    if (prev_norm == 0.0) {
        throw UndefinedMetric("stability: undefined when the previous checkpoint is all zero");
    }
    double diff_sq = 0.0;
    for (std::size_t i = 0; i < w_curr.size(); ++i) {
        const double d = w_curr[i] - w_prev[i];
        diff_sq += d * d;
    }
    return 1.0 - std::sqrt(diff_sq) / prev_norm;
}

Genotype genotype_of(const WeightVector& w_curr,
                     const WeightVector* w_prev,
                     const MetricConfig& cfg,
                     const TrainingMeta& training) {
    cfg.validate();
    Genotype g;
    g.sparsity = sparsity(w_curr);
    g.health = weight_health(w_curr, cfg);
    if (w_prev != nullptr) {
        g.stability = stability(w_curr, *w_prev);
        g.stability_assumed = false;
    } else {
        // No history: the neutral best value, flagged for auditability.
        g.stability = 1.0;
        g.stability_assumed = true;
    }
    g.training = training;
    return g;
}

}  // namespace fedlab

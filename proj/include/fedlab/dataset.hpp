#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedlab/weights.hpp"

namespace fedlab {

// How a synthetic federation was generated; kept with each dataset so runs
// can be reproduced from the record alone.
struct GenerationSpec {
    std::uint64_t seed = 0;
    double skew = 0.0;
    double center_radius = 3.0;
    double spread = 1.0;
};

// Dense labeled classification data, features row-major [num_samples x dim].
struct SyntheticDataset {
    int dim = 0;
    int num_classes = 0;
    std::vector<double> features;
    std::vector<int> labels;
    GenerationSpec spec;

    int num_samples() const { return static_cast<int>(labels.size()); }
    std::span<const double> row(int i) const {
        return {features.data() + static_cast<std::size_t>(i) * dim,
                static_cast<std::size_t>(dim)};
    }
};

struct Federation {
    std::vector<SyntheticDataset> shards;
    SyntheticDataset holdout;
};

/**
 * Gaussian-mixture classification task split into per-client shards plus a
 * balanced holdout pool drawn from the global mixture.
 *
 * Class centers sit on scaled coordinate axes (center c at
 * center_radius * e_{c mod dim}, negated on wrap-around), so classes stay
 * separable at any seed. Per-client class proportions interpolate between
 * the uniform mixture (skew 0) and the client's dominant class (skew 1);
 * counts are stratified, so shard histograms match the proportions up to
 * rounding. All draws come from the passed stream: identical seeds produce
 * identical federations.
 */
Federation generate_federation(int num_clients,
                               int samples_per_client,
                               int dim,
                               int num_classes,
                               double skew,
                               SeededRng& rng,
                               int holdout_samples,
                               double center_radius = 3.0,
                               double spread = 1.0);

}  // namespace fedlab

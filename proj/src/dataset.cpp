#include "fedlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedlab/errors.hpp"

namespace fedlab {
namespace {

// Class c lives at center_radius * e_{c mod dim}; once the axes run out the
// sign flips, so up to 2*dim classes get distinct, equally distant centers.
std::vector<double> class_center(int c, int dim, double radius) {
    std::vector<double> center(dim, 0.0);
    const int axis = c % dim;
    const double sign = ((c / dim) % 2 == 0) ? 1.0 : -1.0;
    center[axis] = sign * radius;
    return center;
}

// Integer class counts for n samples with target proportions p: floor each
// share, then hand the leftover samples to the largest remainders (ties go
// to the lower class index).
std::vector<int> stratified_counts(int n, const std::vector<double>& p) {
    const int c = static_cast<int>(p.size());
    std::vector<int> counts(c, 0);
    std::vector<double> remainder(c, 0.0);
    int assigned = 0;
    for (int k = 0; k < c; ++k) {
        const double target = n * p[k];
        counts[k] = static_cast<int>(std::floor(target + 1e-9));
        remainder[k] = target - counts[k];
        assigned += counts[k];
    }
    std::vector<int> order(c);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return remainder[a] > remainder[b];
    });
    for (int i = 0; assigned < n; ++i) {
        counts[order[i % c]] += 1;
        assigned += 1;
    }
    return counts;
}

SyntheticDataset draw_dataset(const std::vector<int>& class_counts,
                              int dim,
                              int num_classes,
                              double radius,
                              double spread,
                              SeededRng& rng,
                              const GenerationSpec& spec) {
    SyntheticDataset ds;
    ds.dim = dim;
    ds.num_classes = num_classes;
    ds.spec = spec;

    for (int k = 0; k < num_classes; ++k) {
        ds.labels.insert(ds.labels.end(), class_counts[k], k);
    }
    // Fisher-Yates so minibatch order carries no class structure.
    for (std::size_t i = ds.labels.size(); i > 1; --i) {
        const std::size_t j = rng.uniform_index(i);
        std::swap(ds.labels[i - 1], ds.labels[j]);
    }

    ds.features.reserve(ds.labels.size() * dim);
    for (int label : ds.labels) {
        const std::vector<double> center = class_center(label, dim, radius);
        for (int d = 0; d < dim; ++d) {
            ds.features.push_back(center[d] + spread * rng.normal());
        }
    }
    return ds;
}

}  // namespace

Federation generate_federation(int num_clients,
                               int samples_per_client,
                               int dim,
                               int num_classes,
                               double skew,
                               SeededRng& rng,
                               int holdout_samples,
                               double center_radius,
                               double spread) {
    if (num_clients < 1) throw ConfigError("generate_federation: num_clients must be >= 1");
    if (samples_per_client < 1) {
        throw ConfigError("generate_federation: samples_per_client must be >= 1");
    }
    if (dim < 1) throw ConfigError("generate_federation: dim must be >= 1");
    if (num_classes < 2) throw ConfigError("generate_federation: num_classes must be >= 2");
    if (num_classes > 2 * dim) {
        throw ConfigError(
            "generate_federation: num_classes must be <= 2*dim so class centers stay distinct");
    }
    if (!(skew >= 0.0 && skew <= 1.0)) {
        throw ConfigError("generate_federation: skew must be in [0, 1]");
    }
    if (holdout_samples < 0) {
        throw ConfigError("generate_federation: holdout_samples must be >= 0");
    }
    if (!(center_radius > 0.0)) {
        throw ConfigError("generate_federation: center_radius must be > 0");
    }
    if (!(spread > 0.0)) throw ConfigError("generate_federation: spread must be > 0");

    const GenerationSpec spec{rng.seed(), skew, center_radius, spread};

    Federation fed;
    fed.shards.reserve(num_clients);
    for (int i = 0; i < num_clients; ++i) {
        // Client i leans toward class i mod C; skew 0 is the uniform mixture,
        // skew 1 gives the client only its dominant class.
        std::vector<double> p(num_classes, (1.0 - skew) / num_classes);
        p[i % num_classes] += skew;
        const std::vector<int> counts = stratified_counts(samples_per_client, p);
        fed.shards.push_back(draw_dataset(counts, dim, num_classes, center_radius,
                                          spread, rng, spec));
    }

    const std::vector<double> uniform(num_classes, 1.0 / num_classes);
    const std::vector<int> holdout_counts = stratified_counts(holdout_samples, uniform);
    fed.holdout = draw_dataset(holdout_counts, dim, num_classes, center_radius,
                               spread, rng, spec);
    return fed;
}

}  // namespace fedlab

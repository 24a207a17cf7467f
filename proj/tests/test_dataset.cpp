#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "fedlab/dataset.hpp"
#include "fedlab/errors.hpp"

using fedlab::ConfigError;
using fedlab::Federation;
using fedlab::SeededRng;

namespace {

std::vector<int> label_histogram(const fedlab::SyntheticDataset& d) {
    std::vector<int> counts(d.num_classes, 0);
    for (int label : d.labels) {
        REQUIRE(label >= 0);
        REQUIRE(label < d.num_classes);
        ++counts[label];
    }
    return counts;
}

}  // namespace

TEST_CASE("identical seeds produce identical federations") {
    SeededRng a(90);
    SeededRng b(90);
    const Federation fa = fedlab::generate_federation(5, 40, 6, 3, 0.4, a, 100);
    const Federation fb = fedlab::generate_federation(5, 40, 6, 3, 0.4, b, 100);
    REQUIRE(fa.shards.size() == fb.shards.size());
    for (std::size_t i = 0; i < fa.shards.size(); ++i) {
        CHECK(fa.shards[i].features == fb.shards[i].features);
        CHECK(fa.shards[i].labels == fb.shards[i].labels);
    }
    CHECK(fa.holdout.features == fb.holdout.features);
    CHECK(fa.holdout.labels == fb.holdout.labels);
}

TEST_CASE("different seeds produce different data") {
    SeededRng a(91);
    SeededRng b(92);
    const Federation fa = fedlab::generate_federation(2, 30, 4, 2, 0.0, a, 0);
    const Federation fb = fedlab::generate_federation(2, 30, 4, 2, 0.0, b, 0);
    CHECK(fa.shards[0].features != fb.shards[0].features);
}

TEST_CASE("shard shapes and sizes match the request") {
    SeededRng rng(93);
    const Federation f = fedlab::generate_federation(7, 25, 5, 4, 0.2, rng, 60);
    REQUIRE(f.shards.size() == 7);
    for (const auto& shard : f.shards) {
        CHECK(shard.num_samples() == 25);
        CHECK(shard.dim == 5);
        CHECK(shard.num_classes == 4);
        CHECK(shard.features.size() == 25u * 5u);
        CHECK(shard.labels.size() == 25u);
        CHECK(shard.row(3).size() == 5u);
    }
    CHECK(f.holdout.num_samples() == 60);
    CHECK(f.holdout.dim == 5);
}

TEST_CASE("distinct shards hold distinct draws") {
    SeededRng rng(94);
    const Federation f = fedlab::generate_federation(3, 20, 4, 2, 0.0, rng, 0);
    CHECK(f.shards[0].features != f.shards[1].features);
    CHECK(f.shards[1].features != f.shards[2].features);
}

TEST_CASE("zero skew yields near-uniform shard histograms") {
    SeededRng rng(95);
    const int samples = 120;
    const int classes = 3;
    const Federation f = fedlab::generate_federation(4, samples, 6, classes, 0.0, rng, 0);
    for (const auto& shard : f.shards) {
        const std::vector<int> counts = label_histogram(shard);
        for (int c : counts) {
            // Stratified counts, so only rounding moves us off exactly 40.
            CHECK(std::abs(c - samples / classes) <= 1);
        }
    }
}

TEST_CASE("full skew concentrates each shard on its dominant class") {
    SeededRng rng(96);
    const int classes = 3;
    const Federation f = fedlab::generate_federation(6, 50, 4, classes, 1.0, rng, 0);
    for (std::size_t i = 0; i < f.shards.size(); ++i) {
        const std::vector<int> counts = label_histogram(f.shards[i]);
        const int dominant = static_cast<int>(i) % classes;
        CHECK(counts[dominant] == 50);
    }
}

TEST_CASE("intermediate skew shifts mass towards the dominant class") {
    SeededRng rng(97);
    const Federation f = fedlab::generate_federation(3, 200, 4, 2, 0.5, rng, 0);
    // skew 0.5 over two classes: dominant gets 0.25 + 0.5 = 0.75 of the shard.
    for (std::size_t i = 0; i < f.shards.size(); ++i) {
        const std::vector<int> counts = label_histogram(f.shards[i]);
        const int dominant = static_cast<int>(i) % 2;
        CHECK(std::abs(counts[dominant] - 150) <= 1);
    }
}

TEST_CASE("holdout is balanced across classes") {
    SeededRng rng(98);
    const Federation f = fedlab::generate_federation(4, 30, 5, 3, 0.9, rng, 90);
    const std::vector<int> counts = label_histogram(f.holdout);
    for (int c : counts) {
        CHECK(std::abs(c - 30) <= 1);
    }
}

TEST_CASE("features cluster around class centers") {
    SeededRng rng(99);
    const double radius = 3.0;
    const Federation f = fedlab::generate_federation(2, 400, 4, 2, 0.0, rng, 0);
    // Class 0 centers on +radius * e0, class 1 on +radius * e1; with unit
    // spread the sample mean of coordinate 0 for class-0 rows sits near 3.
    double sum0 = 0.0;
    int n0 = 0;
    for (const auto& shard : f.shards) {
        for (int i = 0; i < shard.num_samples(); ++i) {
            if (shard.labels[i] == 0) {
                sum0 += shard.row(i)[0];
                ++n0;
            }
        }
    }
    REQUIRE(n0 > 100);
    CHECK(std::abs(sum0 / n0 - radius) < 0.3);
}

TEST_CASE("spread controls the in-class variance") {
    SeededRng a(100);
    SeededRng b(100);
    const Federation tight = fedlab::generate_federation(1, 300, 3, 2, 0.0, a, 0, 3.0, 0.1);
    const Federation wide = fedlab::generate_federation(1, 300, 3, 2, 0.0, b, 0, 3.0, 2.0);
    const auto scatter = [](const fedlab::SyntheticDataset& d) {
        double mean = 0.0;
        for (int i = 0; i < d.num_samples(); ++i) mean += d.row(i)[2];
        mean /= d.num_samples();
        double var = 0.0;
        for (int i = 0; i < d.num_samples(); ++i) {
            const double delta = d.row(i)[2] - mean;
            var += delta * delta;
        }
        return var / d.num_samples();
    };
    // Coordinate 2 carries no class center for classes {0,1}, so its
    // variance is the noise variance alone.
    CHECK(scatter(tight.shards[0]) < 0.05);
    CHECK(scatter(wide.shards[0]) > 2.0);
}

TEST_CASE("generation spec is recorded on every dataset") {
    SeededRng rng(101);
    const Federation f = fedlab::generate_federation(2, 10, 3, 2, 0.25, rng, 20, 2.5, 0.5);
    for (const auto& shard : f.shards) {
        CHECK(shard.spec.skew == 0.25);
        CHECK(shard.spec.center_radius == 2.5);
        CHECK(shard.spec.spread == 0.5);
    }
    CHECK(f.holdout.spec.skew == 0.25);
}

TEST_CASE("federation generation rejects invalid shapes") {
    SeededRng rng(102);
    CHECK_THROWS_AS(fedlab::generate_federation(0, 10, 3, 2, 0.0, rng, 0), ConfigError);
    CHECK_THROWS_AS(fedlab::generate_federation(2, 0, 3, 2, 0.0, rng, 0), ConfigError);
    CHECK_THROWS_AS(fedlab::generate_federation(2, 10, 0, 2, 0.0, rng, 0), ConfigError);
    CHECK_THROWS_AS(fedlab::generate_federation(2, 10, 3, 1, 0.0, rng, 0), ConfigError);
    CHECK_THROWS_AS(fedlab::generate_federation(2, 10, 3, 2, -0.1, rng, 0), ConfigError);
    CHECK_THROWS_AS(fedlab::generate_federation(2, 10, 3, 2, 1.1, rng, 0), ConfigError);
    CHECK_THROWS_AS(fedlab::generate_federation(2, 10, 3, 2, 0.0, rng, -1), ConfigError);
    // More classes than axis slots in both directions.
    CHECK_THROWS_AS(fedlab::generate_federation(2, 10, 3, 7, 0.0, rng, 0), ConfigError);
    CHECK_THROWS_AS(fedlab::generate_federation(2, 10, 3, 2, 0.0, rng, 0, -1.0), ConfigError);
    CHECK_THROWS_AS(fedlab::generate_federation(2, 10, 3, 2, 0.0, rng, 0, 3.0, 0.0), ConfigError);
}

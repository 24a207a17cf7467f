#include <cmath>
#include <vector>

#include <doctest.h>

#include "fedlab/errors.hpp"
#include "fedlab/metrics.hpp"
#include "fedlab/weights.hpp"

using fedlab::ConfigError;
using fedlab::DimensionError;
using fedlab::MetricConfig;
using fedlab::TrainingMeta;
using fedlab::UndefinedMetric;
using fedlab::WeightVector;

TEST_CASE("sparsity endpoint values") {
    // One-hot: maximally concentrated mass.
    CHECK(fedlab::sparsity(WeightVector({0.0, 0.0, 5.0, 0.0})) == 1.0);
    CHECK(fedlab::sparsity(WeightVector({-2.0, 0.0})) == 1.0);
    // All elements equal in magnitude: maximally spread mass. Exact even for
    // lengths with irrational sqrt and values with no exact binary form.
    CHECK(fedlab::sparsity(WeightVector({1.0, 1.0, 1.0})) == 0.0);
    CHECK(fedlab::sparsity(WeightVector({0.5, -0.5, 0.5, -0.5})) == 0.0);
    CHECK(fedlab::sparsity(WeightVector({0.4, 0.4, 0.4, 0.4, 0.4})) == 0.0);
    CHECK(fedlab::sparsity(WeightVector({-0.3, 0.3, -0.3})) == 0.0);
    // Huge magnitudes must not overflow the norm accumulation.
    CHECK(fedlab::sparsity(WeightVector({1e300, 1e300, 1e300})) == 0.0);
    CHECK(fedlab::sparsity(WeightVector({0.0, 1e300, 0.0})) == 1.0);
}

TEST_CASE("sparsity matches a hand-computed interior value") {
    // L=2, l1=7, l2=5: (sqrt(2) - 7/5) / (sqrt(2) - 1).
    const double expected = (std::sqrt(2.0) - 1.4) / (std::sqrt(2.0) - 1.0);
    CHECK(fedlab::sparsity(WeightVector({3.0, 4.0})) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(fedlab::sparsity(WeightVector({3.0, 4.0})) ==
          doctest::Approx(0.03431457505076197).epsilon(1e-12));
}

TEST_CASE("sparsity is scale invariant") {
    fedlab::SeededRng rng(401);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> vals(3 + rng.uniform_index(20));
        for (double& v : vals) v = rng.uniform(-2.0, 2.0);
        const WeightVector w(vals);
        const double base = fedlab::sparsity(w);
        for (double c : {-3.0, 0.5, 10.0}) {
            std::vector<double> scaled = vals;
            for (double& v : scaled) v *= c;
            CHECK(fedlab::sparsity(WeightVector(scaled)) == doctest::Approx(base).epsilon(1e-9));
        }
    }
}

TEST_CASE("sparsity stays within the unit interval") {
    fedlab::SeededRng rng(402);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> vals(2 + rng.uniform_index(30));
        for (double& v : vals) v = rng.uniform(-10.0, 10.0);
        const double s = fedlab::sparsity(WeightVector(std::move(vals)));
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("sparsity error paths") {
    CHECK_THROWS_AS(fedlab::sparsity(WeightVector()), DimensionError);
    CHECK_THROWS_AS(fedlab::sparsity(WeightVector({1.0})), DimensionError);
    CHECK_THROWS_AS(fedlab::sparsity(WeightVector({0.0, 0.0, 0.0})), UndefinedMetric);
}

TEST_CASE("weight_moments uses the population divisor") {
    const auto [mean, sd] = fedlab::weight_moments(WeightVector({1.0, 2.0, 3.0, 4.0}));
    CHECK(mean == 2.5);
    // Population variance: ((1.5^2 + 0.5^2) * 2) / 4 = 1.25.
    CHECK(sd == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
    const auto [m1, s1] = fedlab::weight_moments(WeightVector({7.0}));
    CHECK(m1 == 7.0);
    CHECK(s1 == 0.0);
    CHECK_THROWS_AS(fedlab::weight_moments(WeightVector()), DimensionError);
}

TEST_CASE("weight_health matches hand-computed values") {
    MetricConfig cfg;
    cfg.sigma_target = 0.1;
    // mean 0.2, sd 0: -(0.2/0.1 + 0.1/0.1) = -3.
    CHECK(fedlab::weight_health(WeightVector({0.2, 0.2}), cfg) == doctest::Approx(-3.0).epsilon(1e-12));
    // All zeros: mean 0, sd 0, penalty only for missing spread.
    CHECK(fedlab::weight_health(WeightVector({0.0, 0.0, 0.0, 0.0}), cfg) ==
          doctest::Approx(-1.0).epsilon(1e-12));
    // mean 0, sd exactly on target: the ideal score of zero.
    CHECK(fedlab::weight_health(WeightVector({0.1, -0.1}), cfg) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("weight_health is never positive") {
    MetricConfig cfg;
    fedlab::SeededRng rng(403);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> vals(1 + rng.uniform_index(30));
        for (double& v : vals) v = rng.uniform(-1.0, 1.0);
        CHECK(fedlab::weight_health(WeightVector(std::move(vals)), cfg) <= 0.0);
    }
}

TEST_CASE("weight_health validates its config") {
    MetricConfig bad;
    bad.sigma_target = 0.0;
    CHECK_THROWS_AS(fedlab::weight_health(WeightVector({1.0}), bad), ConfigError);
    bad.sigma_target = -0.5;
    CHECK_THROWS_AS(fedlab::weight_health(WeightVector({1.0}), bad), ConfigError);
    MetricConfig bad_tol;
    bad_tol.zero_tolerance = -1e-9;
    CHECK_THROWS_AS(bad_tol.validate(), ConfigError);
}

TEST_CASE("stability endpoint and hand-computed values") {
    const WeightVector w({0.3, -0.7, 1.1});
    // No movement at all: perfect score.
    CHECK(fedlab::stability(w, w) == 1.0);
    // Doubling every weight moves by exactly the previous norm.
    const WeightVector w2({0.6, -1.4, 2.2});
    CHECK(fedlab::stability(w2, w) == doctest::Approx(0.0).epsilon(1e-15));
    // Orthogonal unit step: 1 - sqrt(2).
    CHECK(fedlab::stability(WeightVector({0.0, 1.0}), WeightVector({1.0, 0.0})) ==
          doctest::Approx(1.0 - std::sqrt(2.0)).epsilon(1e-15));
    // Halving a single weight: step of 1 against norm 2.
    CHECK(fedlab::stability(WeightVector({1.0, 0.0}), WeightVector({2.0, 0.0})) == 0.5);
}

TEST_CASE("stability error paths") {
    CHECK_THROWS_AS(fedlab::stability(WeightVector({1.0}), WeightVector({1.0, 2.0})),
                    DimensionError);
    CHECK_THROWS_AS(fedlab::stability(WeightVector({1.0, 2.0}), WeightVector({0.0, 0.0})),
                    UndefinedMetric);
}

TEST_CASE("genotype_of assembles all metrics") {
    MetricConfig cfg;
    cfg.sigma_target = 1.0;
    TrainingMeta meta;
    meta.loss = 0.25;
    meta.epochs_trained = 5;
    const WeightVector curr({3.0, 4.0});
    const WeightVector prev({2.0, 0.0});

    const fedlab::Genotype g = fedlab::genotype_of(curr, &prev, cfg, meta);
    CHECK(g.sparsity == doctest::Approx(0.03431457505076197).epsilon(1e-12));
    // Step is (1, 4), norm sqrt(17); previous norm 2.
    CHECK(g.stability == doctest::Approx(1.0 - std::sqrt(17.0) / 2.0).epsilon(1e-12));
    // mean 3.5, sd 0.5, target 1: -(3.5 + 0.5) = -4.
    CHECK(g.health == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK_FALSE(g.stability_assumed);
    CHECK(g.training.loss.has_value());
    CHECK(*g.training.loss == 0.25);
    CHECK(g.training.epochs_trained == 5);
}

TEST_CASE("genotype_of without history assumes neutral stability") {
    MetricConfig cfg;
    const fedlab::Genotype g =
        fedlab::genotype_of(WeightVector({3.0, 4.0}), nullptr, cfg, TrainingMeta{});
    CHECK(g.stability == 1.0);
    CHECK(g.stability_assumed);
}

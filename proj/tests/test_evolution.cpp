#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "fedlab/errors.hpp"
#include "fedlab/evolution.hpp"
#include "oracles.hpp"

using fedlab::ConfigError;
using fedlab::DegenerateFitness;
using fedlab::EliteSpec;
using fedlab::EvolutionConfig;
using fedlab::FitnessWeights;
using fedlab::HealthTermMode;
using fedlab::MetricConfig;
using fedlab::Phenotype;
using fedlab::SeededRng;
using fedlab::StateError;
using fedlab::WeightVector;

namespace {

Phenotype make_pheno(std::string id, std::vector<double> weights,
                     double sparsity, double stability, double health) {
    Phenotype p;
    p.id = std::move(id);
    p.weights = WeightVector(std::move(weights));
    p.genotype.sparsity = sparsity;
    p.genotype.stability = stability;
    p.genotype.health = health;
    return p;
}

}  // namespace

TEST_CASE("fitness matches hand-computed values in both health modes") {
    FitnessWeights fw;  // 0.5 / 0.3 / 0.2, bounded health term

    // Ideal genotype: zero sparsity, perfect stability, zero health penalty.
    Phenotype ideal = make_pheno("x", {1.0}, 0.0, 1.0, 0.0);
    CHECK(fedlab::fitness(ideal, fw) == doctest::Approx(1.0).epsilon(1e-15));

    Phenotype mid = make_pheno("x", {1.0}, 0.5, 0.8, -1.0);
    // 0.5*0.5 + 0.3*0.8 + 0.2 * 1/(1-(-1)) = 0.25 + 0.24 + 0.1.
    CHECK(fedlab::fitness(mid, fw) == doctest::Approx(0.59).epsilon(1e-12));

    FitnessWeights literal = fw;
    literal.health_term_mode = HealthTermMode::LiteralGuarded;
    // 0.25 + 0.24 + 0.2 * 1/(-1) = 0.29.
    CHECK(fedlab::fitness(mid, literal) == doctest::Approx(0.29).epsilon(1e-12));

    // Literal mode at health 0 hits the guard floor of -1e-6.
    Phenotype guarded = make_pheno("x", {1.0}, 0.5, 0.8, 0.0);
    CHECK(fedlab::fitness(guarded, literal) ==
          doctest::Approx(0.49 - 0.2 * 1e6).epsilon(1e-9));
}

TEST_CASE("fitness in bounded mode increases with better health") {
    FitnessWeights fw;
    Phenotype worse = make_pheno("x", {1.0}, 0.3, 0.5, -4.0);
    Phenotype better = make_pheno("x", {1.0}, 0.3, 0.5, -1.0);
    CHECK(fedlab::fitness(better, fw) > fedlab::fitness(worse, fw));
    // The health term contribution stays within (0, gamma].
    Phenotype awful = make_pheno("x", {1.0}, 1.0, 0.0, -1e9);
    CHECK(fedlab::fitness(awful, fw) > 0.0);
    CHECK(fedlab::fitness(awful, fw) < 1e-6);
}

TEST_CASE("fitness ignores the cached score") {
    FitnessWeights fw;
    Phenotype p = make_pheno("x", {1.0}, 0.5, 0.8, -1.0);
    p.fitness = 123.0;
    CHECK(fedlab::fitness(p, fw) == doctest::Approx(0.59).epsilon(1e-12));
}

TEST_CASE("fitness weight validation") {
    FitnessWeights fw;
    CHECK_NOTHROW(fw.validate());
    FitnessWeights negative = fw;
    negative.beta = -0.1;
    CHECK_THROWS_AS(negative.validate(), ConfigError);
    FitnessWeights increasing = fw;
    increasing.epsilon = 0.1;
    increasing.beta = 0.5;
    CHECK_THROWS_AS(increasing.validate(), ConfigError);
    FitnessWeights zeros;
    zeros.epsilon = zeros.beta = zeros.gamma = 0.0;
    CHECK_THROWS_AS(zeros.validate(), ConfigError);
    // Equal coefficients count as monotonically decreasing.
    FitnessWeights flat;
    flat.epsilon = flat.beta = flat.gamma = 0.3;
    CHECK_NOTHROW(flat.validate());
}

TEST_CASE("rank_population uses cached fitness and breaks ties by id") {
    FitnessWeights fw;
    std::vector<Phenotype> pop;
    pop.push_back(make_pheno("a", {1.0}, 0, 0, 0));
    pop.push_back(make_pheno("b", {1.0}, 0, 0, 0));
    pop.push_back(make_pheno("c", {1.0}, 0, 0, 0));
    pop[0].fitness = 0.1;
    pop[1].fitness = 0.9;
    pop[2].fitness = 0.5;
    CHECK(fedlab::rank_population(pop, fw) == std::vector<std::size_t>({1, 2, 0}));

    // Equal scores fall back to the id ordering.
    std::vector<Phenotype> tied;
    tied.push_back(make_pheno("b", {1.0}, 0, 0, 0));
    tied.push_back(make_pheno("a", {1.0}, 0, 0, 0));
    tied[0].fitness = 0.7;
    tied[1].fitness = 0.7;
    CHECK(fedlab::rank_population(tied, fw) == std::vector<std::size_t>({1, 0}));

    CHECK_THROWS_AS(fedlab::rank_population(std::vector<Phenotype>{}, fw), StateError);
}

TEST_CASE("rank_population matches the selection-sort oracle on random data") {
    FitnessWeights fw;
    SeededRng rng(501);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(12);
        std::vector<Phenotype> pop;
        std::vector<double> scores;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) {
            Phenotype p = make_pheno("m" + std::to_string(rng.uniform_index(6)), {1.0}, 0, 0, 0);
            // Coarse grid of scores so ties actually happen.
            p.fitness = static_cast<double>(rng.uniform_index(4)) / 4.0;
            scores.push_back(*p.fitness);
            ids.push_back(p.id);
            pop.push_back(std::move(p));
        }
        CHECK(fedlab::rank_population(pop, fw) == oracle::rank_by_score(scores, ids));
    }
}

TEST_CASE("ranking is invariant under increasing transforms of the score") {
    FitnessWeights fw;
    SeededRng rng(502);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Phenotype> pop;
        for (int i = 0; i < 10; ++i) {
            Phenotype p = make_pheno("p" + std::to_string(i), {1.0}, 0, 0, 0);
            p.fitness = rng.uniform(-2.0, 2.0);
            pop.push_back(std::move(p));
        }
        const auto base = fedlab::rank_population(pop, fw);
        for (Phenotype& p : pop) {
            p.fitness = 2.0 * *p.fitness + 1.0;
        }
        CHECK(fedlab::rank_population(pop, fw) == base);
    }
}

TEST_CASE("elite spec resolution") {
    CHECK(EliteSpec::from_fraction(0.01).resolve(30) == 1);
    CHECK(EliteSpec::from_fraction(0.2).resolve(5) == 1);
    CHECK(EliteSpec::from_fraction(0.5).resolve(3) == 2);
    CHECK(EliteSpec::from_fraction(1.0).resolve(4) == 4);
    CHECK(EliteSpec::from_count(5).resolve(3) == 3);
    CHECK(EliteSpec::from_count(2).resolve(10) == 2);
    CHECK_THROWS_AS(EliteSpec::from_fraction(0.0), ConfigError);
    CHECK_THROWS_AS(EliteSpec::from_fraction(1.5), ConfigError);
    CHECK_THROWS_AS(EliteSpec::from_count(0), ConfigError);
    CHECK_THROWS_AS(EliteSpec::from_count(2).resolve(0), StateError);
}

TEST_CASE("select_elites takes the ranking prefix") {
    FitnessWeights fw;
    EvolutionConfig cfg;
    cfg.elites = EliteSpec::from_count(2);
    std::vector<Phenotype> pop;
    for (int i = 0; i < 5; ++i) {
        Phenotype p = make_pheno("p" + std::to_string(i), {1.0}, 0, 0, 0);
        p.fitness = static_cast<double>(i);
        pop.push_back(std::move(p));
    }
    const auto ranking = fedlab::rank_population(pop, fw);
    const auto elites = fedlab::select_elites(pop, ranking, cfg);
    CHECK(elites == std::vector<std::size_t>({4, 3}));

    const std::vector<std::size_t> short_ranking = {0, 1};
    CHECK_THROWS_AS(fedlab::select_elites(pop, short_ranking, cfg), StateError);
}

TEST_CASE("select_elites agrees with the exhaustive subset oracle") {
    FitnessWeights fw;
    SeededRng rng(503);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(8);
        std::vector<Phenotype> pop;
        std::vector<double> scores;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) {
            Phenotype p = make_pheno("q" + std::to_string(i), {1.0}, 0, 0, 0);
            p.fitness = rng.uniform(-1.0, 1.0);
            scores.push_back(*p.fitness);
            ids.push_back(p.id);
            pop.push_back(std::move(p));
        }
        EvolutionConfig cfg;
        const int k = 1 + static_cast<int>(rng.uniform_index(n));
        cfg.elites = EliteSpec::from_count(k);
        const auto ranking = fedlab::rank_population(pop, fw);
        const auto got = fedlab::select_elites(pop, ranking, cfg);
        CHECK(got == oracle::best_subset(scores, ids, static_cast<std::size_t>(k)));
    }
}

TEST_CASE("uniform_crossover is deterministic and copies coordinates verbatim") {
    Phenotype a = make_pheno("a", {0.0, 0.0, 0.0, 0.0, 0.0}, 0, 0, 0);
    Phenotype b = make_pheno("b", {1.0, 1.0, 1.0, 1.0, 1.0}, 0, 0, 0);
    SeededRng r1(7);
    SeededRng r2(7);
    const WeightVector c1 = fedlab::uniform_crossover(a, b, r1);
    const WeightVector c2 = fedlab::uniform_crossover(a, b, r2);
    CHECK(c1 == c2);
    for (std::size_t i = 0; i < c1.size(); ++i) {
        const bool from_a = c1[i] == 0.0;
        const bool from_b = c1[i] == 1.0;
        CHECK((from_a || from_b));
    }

    Phenotype shorter = make_pheno("s", {1.0}, 0, 0, 0);
    SeededRng r3(1);
    CHECK_THROWS_AS(fedlab::uniform_crossover(a, shorter, r3), fedlab::DimensionError);
}

TEST_CASE("uniform_crossover picks each parent about half the time") {
    const std::size_t dim = 20000;
    Phenotype a = make_pheno("a", std::vector<double>(dim, 0.0), 0, 0, 0);
    Phenotype b = make_pheno("b", std::vector<double>(dim, 1.0), 0, 0, 0);
    SeededRng rng(11);
    const WeightVector child = fedlab::uniform_crossover(a, b, rng);
    double from_b = 0.0;
    for (std::size_t i = 0; i < dim; ++i) from_b += child[i];
    const double frac = from_b / static_cast<double>(dim);
    CHECK(frac > 0.48);
    CHECK(frac < 0.52);
}

TEST_CASE("mutate with rate zero is the exact identity") {
    EvolutionConfig cfg;
    cfg.mutation_rate = 0.0;
    MetricConfig mcfg;
    SeededRng rng(3);
    const WeightVector w({0.5, -0.25, 0.0, 1e-13, 2.0});
    CHECK(fedlab::mutate(w, cfg, mcfg, rng) == w);
}

TEST_CASE("mutate preserves the near-zero mask exactly") {
    EvolutionConfig cfg;
    cfg.mutation_rate = 1.0;
    cfg.mutation_noise_scale = 0.05;
    MetricConfig mcfg;  // zero_tolerance 1e-12
    SeededRng rng(19);
    std::vector<double> vals;
    for (int i = 0; i < 500; ++i) {
        vals.push_back(i % 3 == 0 ? 0.0 : (i % 3 == 1 ? 0.5 : -0.8));
    }
    const WeightVector w(vals);
    const WeightVector m = fedlab::mutate(w, cfg, mcfg, rng);
    REQUIRE(m.size() == w.size());
    int moved = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (std::abs(w[i]) <= mcfg.zero_tolerance) {
            // Dead coordinates stay exactly dead.
            CHECK(m[i] == 0.0);
        } else {
            // Live coordinates never fall into the dead band.
            CHECK(std::abs(m[i]) > mcfg.zero_tolerance);
            if (m[i] != w[i]) ++moved;
        }
    }
    CHECK(moved > 300);
}

TEST_CASE("mutate perturbation size tracks the noise scale") {
    EvolutionConfig cfg;
    cfg.mutation_rate = 1.0;
    cfg.mutation_noise_scale = 0.01;
    MetricConfig mcfg;
    SeededRng rng(23);
    // Values far from zero, so the dead-band guard almost never triggers
    // and the average |delta| of uniform noise on [-s, s] is s/2.
    const WeightVector w(std::vector<double>(20000, 0.75));
    const WeightVector m = fedlab::mutate(w, cfg, mcfg, rng);
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) total += std::abs(m[i] - w[i]);
    const double mean_delta = total / static_cast<double>(w.size());
    CHECK(mean_delta > 0.0045);
    CHECK(mean_delta < 0.0055);
}

TEST_CASE("aggregate_elites forms the fitness-normalized combination") {
    FitnessWeights fw;
    std::vector<Phenotype> elites;
    elites.push_back(make_pheno("a", {0.0, 4.0}, 0, 0, 0));
    elites.push_back(make_pheno("b", {4.0, 0.0}, 0, 0, 0));
    elites[0].fitness = 0.75;
    elites[1].fitness = 0.25;
    const WeightVector g = fedlab::aggregate_elites(elites, fw);
    REQUIRE(g.size() == 2);
    CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g[1] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("aggregate_elites rejects a vanishing fitness sum") {
    FitnessWeights fw;
    std::vector<Phenotype> elites;
    elites.push_back(make_pheno("a", {1.0}, 0, 0, 0));
    elites.push_back(make_pheno("b", {2.0}, 0, 0, 0));
    elites[0].fitness = 0.5;
    elites[1].fitness = -0.5;
    CHECK_THROWS_AS(fedlab::aggregate_elites(elites, fw), DegenerateFitness);
}

TEST_CASE("a uniform population is a fixed point of evolve") {
    EvolutionConfig cfg;
    cfg.elites = EliteSpec::from_count(2);
    cfg.mutation_rate = 0.0;
    FitnessWeights fw;
    MetricConfig mcfg;
    SeededRng rng(31);

    const WeightVector w({0.25, -0.5, 0.125, 1.0});
    std::vector<Phenotype> pop;
    for (int i = 0; i < 6; ++i) {
        Phenotype p = make_pheno("c" + std::to_string(i), w.values(), 0.2, 0.9, -0.5);
        pop.push_back(std::move(p));
    }
    const auto result = fedlab::evolve(pop, cfg, fw, mcfg, rng);
    CHECK(result.global_model == w);
    REQUIRE(result.population.size() == pop.size());
    for (const Phenotype& p : result.population) {
        CHECK(p.weights == w);
    }
}

TEST_CASE("evolve keeps elites and refills with tagged offspring") {
    EvolutionConfig cfg;
    cfg.elites = EliteSpec::from_count(2);
    cfg.mutation_rate = 0.01;
    cfg.mutation_noise_scale = 0.01;
    FitnessWeights fw;
    MetricConfig mcfg;
    SeededRng rng(37);

    std::vector<Phenotype> pop;
    SeededRng init(73);
    for (int i = 0; i < 30; ++i) {
        std::vector<double> vals(8);
        for (double& v : vals) v = init.uniform(-1.0, 1.0);
        Phenotype p = make_pheno("client" + std::to_string(i), std::move(vals),
                                 init.uniform(0.0, 1.0), init.uniform(-1.0, 1.0),
                                 -init.uniform(0.0, 3.0));
        pop.push_back(std::move(p));
    }
    const auto result = fedlab::evolve(pop, cfg, fw, mcfg, rng, 0);
    REQUIRE(result.population.size() == 30);
    CHECK(result.stats.elite_ids.size() == 2);

    // The first two survivors are the elites, unchanged.
    for (int e = 0; e < 2; ++e) {
        const std::string& id = result.population[e].id;
        CHECK(id == result.stats.elite_ids[e]);
        const auto orig = std::find_if(pop.begin(), pop.end(),
                                       [&](const Phenotype& p) { return p.id == id; });
        REQUIRE(orig != pop.end());
        CHECK(result.population[e].weights == orig->weights);
    }
    // The rest are generation-tagged offspring with fresh genotypes.
    for (std::size_t i = 2; i < result.population.size(); ++i) {
        const Phenotype& child = result.population[i];
        CHECK(child.id == "g000-o" + std::string(4 - std::to_string(i - 2).size(), '0') +
                              std::to_string(i - 2));
        CHECK(child.fitness.has_value());
        CHECK_FALSE(child.genotype.stability_assumed);
        CHECK_FALSE(child.genotype.training.loss.has_value());
    }
    // Stats summarize the scored population.
    CHECK(result.stats.best_fitness >= result.stats.mean_fitness);
    CHECK_FALSE(result.stats.degenerate_fitness_fallback);
}

TEST_CASE("evolve falls back to the plain mean on degenerate fitness") {
    // Two phenotypes engineered to opposite fitness scores: in literal mode
    // F = 0.5*(1-s) + 0.3*r + 0.2/h. With h = -1, r = 0: s=1 gives -0.2 and
    // s=0.2 gives +0.2, so the elite pair sums to zero.
    EvolutionConfig cfg;
    cfg.elites = EliteSpec::from_count(2);
    cfg.mutation_rate = 0.0;
    FitnessWeights fw;
    fw.health_term_mode = HealthTermMode::LiteralGuarded;
    MetricConfig mcfg;
    SeededRng rng(41);

    std::vector<Phenotype> pop;
    pop.push_back(make_pheno("a", {2.0, 2.0}, 1.0, 0.0, -1.0));
    pop.push_back(make_pheno("b", {4.0, 4.0}, 0.2, 0.0, -1.0));
    const auto result = fedlab::evolve(pop, cfg, fw, mcfg, rng);
    CHECK(result.stats.degenerate_fitness_fallback);
    REQUIRE(result.global_model.size() == 2);
    CHECK(result.global_model[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(result.global_model[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("run_evolution without mutation never loses the best score") {
    EvolutionConfig cfg;
    cfg.elites = EliteSpec::from_count(2);
    cfg.mutation_rate = 0.0;
    cfg.generations = 20;
    FitnessWeights fw;
    MetricConfig mcfg;
    SeededRng rng(43);

    std::vector<Phenotype> pop;
    SeededRng init(47);
    for (int i = 0; i < 12; ++i) {
        std::vector<double> vals(6);
        for (double& v : vals) v = init.normal() * 0.3;
        Phenotype p = make_pheno("s" + std::to_string(i), std::move(vals),
                                 init.uniform(0.0, 1.0), init.uniform(-1.0, 1.0),
                                 -init.uniform(0.0, 2.0));
        pop.push_back(std::move(p));
    }
    const auto run = fedlab::run_evolution(std::move(pop), cfg, fw, mcfg, rng);
    REQUIRE(run.generations.size() == 20);
    for (std::size_t g = 1; g < run.generations.size(); ++g) {
        CHECK(run.generations[g].best_fitness >=
              run.generations[g - 1].best_fitness - 1e-12);
    }
}

TEST_CASE("evolution config validation") {
    EvolutionConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    EvolutionConfig bad_rate = cfg;
    bad_rate.mutation_rate = -0.1;
    CHECK_THROWS_AS(bad_rate.validate(), ConfigError);
    bad_rate.mutation_rate = 1.1;
    CHECK_THROWS_AS(bad_rate.validate(), ConfigError);
    EvolutionConfig bad_noise = cfg;
    bad_noise.mutation_noise_scale = 0.0;
    CHECK_THROWS_AS(bad_noise.validate(), ConfigError);
    EvolutionConfig bad_gens = cfg;
    bad_gens.generations = 0;
    CHECK_THROWS_AS(bad_gens.validate(), ConfigError);
}

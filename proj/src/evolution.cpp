#include "fedlab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <utility>

#include "fedlab/errors.hpp"
#include "fedlab/log.hpp"

namespace fedlab {

namespace {

constexpr double kHealthGuardFloor = 1e-6;
constexpr double kDegenerateFitnessSum = 1e-12;

std::string offspring_id(int generation, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "g%03d-o%04d", generation, index);
    return buf;
}

}  // namespace

void FitnessWeights::validate() const {
    if (epsilon < 0.0 || beta < 0.0 || gamma < 0.0) {
        throw ConfigError("FitnessWeights: coefficients must be non-negative");
    }
    if (!(epsilon >= beta && beta >= gamma)) {
        throw ConfigError("FitnessWeights: coefficients must be monotonically decreasing");
    }
    if (epsilon + beta + gamma <= 0.0) {
        throw ConfigError("FitnessWeights: coefficients must not all be zero");
    }
}

EliteSpec EliteSpec::from_fraction(double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw ConfigError("EliteSpec: fraction must lie in (0, 1]");
    }
    EliteSpec spec;
    spec.kind = Kind::Fraction;
    spec.fraction = lambda;
    return spec;
}

EliteSpec EliteSpec::from_count(int count) {
    if (count < 1) {
        throw ConfigError("EliteSpec: count must be at least 1");
    }
    EliteSpec spec;
    spec.kind = Kind::Count;
    spec.count = count;
    return spec;
}

int EliteSpec::resolve(int population_size) const {
    if (population_size < 1) {
        throw StateError("EliteSpec: empty population");
    }
    int resolved = 0;
    if (kind == Kind::Fraction) {
        // The small slack keeps exact products like 0.2*5 from rounding up.
        resolved = static_cast<int>(std::ceil(fraction * population_size - 1e-9));
    } else {
        resolved = count;
    }
    return std::clamp(resolved, 1, population_size);
}

void EvolutionConfig::validate() const {
    if (mutation_rate < 0.0 || mutation_rate > 1.0) {
        throw ConfigError("EvolutionConfig: mutation_rate must lie in [0, 1]");
    }
    if (!(mutation_noise_scale > 0.0)) {
        throw ConfigError("EvolutionConfig: mutation_noise_scale must be positive");
    }
    if (generations < 1) {
        throw ConfigError("EvolutionConfig: generations must be at least 1");
    }
    if (elites.kind == EliteSpec::Kind::Fraction) {
        EliteSpec::from_fraction(elites.fraction);
    } else {
        EliteSpec::from_count(elites.count);
    }
}

double fitness(const Phenotype& p, const FitnessWeights& fw) {
    fw.validate();
    const Genotype& g = p.genotype;
    double health_term = 0.0;
    if (fw.health_term_mode == HealthTermMode::Bounded) {
        health_term = 1.0 / (1.0 - g.health);
    } else {
        // Health is non-positive, so the guard floor clamps within the domain.
        const double h = std::min(g.health, -kHealthGuardFloor);
        health_term = 1.0 / h;
    }
    const double score =
        fw.epsilon * (1.0 - g.sparsity) + fw.beta * g.stability + fw.gamma * health_term;
    if (!std::isfinite(score)) {
        throw NumericError("fitness: non-finite score");
    }
    return score;
}

std::vector<std::size_t> rank_population(std::span<const Phenotype> pop,
                                         const FitnessWeights& fw) {
    if (pop.empty()) {
        throw StateError("rank_population: empty population");
    }
    std::vector<double> scores(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        scores[i] = pop[i].fitness ? *pop[i].fitness : fitness(pop[i], fw);
    }
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        if (pop[a].id != pop[b].id) return pop[a].id < pop[b].id;
        return a < b;
    });
    return order;
}

std::vector<std::size_t> select_elites(std::span<const Phenotype> pop,
                                       std::span<const std::size_t> ranking,
                                       const EvolutionConfig& cfg) {
    if (pop.empty() || ranking.size() != pop.size()) {
        throw StateError("select_elites: ranking does not cover the population");
    }
    const int elite_count = cfg.elites.resolve(static_cast<int>(pop.size()));
    return {ranking.begin(), ranking.begin() + elite_count};
}

WeightVector uniform_crossover(const Phenotype& parent_a,
                               const Phenotype& parent_b,
                               SeededRng& rng) {
    if (parent_a.weights.size() != parent_b.weights.size()) {
        throw DimensionError("uniform_crossover: parent weight lengths differ");
    }
    std::vector<double> child(parent_a.weights.size());
    for (std::size_t i = 0; i < child.size(); ++i) {
        child[i] = rng.bernoulli(0.5) ? parent_a.weights[i] : parent_b.weights[i];
    }
    return WeightVector(std::move(child));
}

WeightVector mutate(const WeightVector& w,
                    const EvolutionConfig& cfg,
                    const MetricConfig& metric_cfg,
                    SeededRng& rng) {
    cfg.validate();
    const double tol = metric_cfg.zero_tolerance;
    std::vector<double> out(w.values());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!rng.bernoulli(cfg.mutation_rate)) {
            continue;
        }
        const double noise = rng.uniform(-cfg.mutation_noise_scale, cfg.mutation_noise_scale);
        if (std::abs(out[i]) <= tol) {
            // Near-zero genes stay zero; mutation never grows the Hamming weight.
            out[i] = 0.0;
            continue;
        }
        const double candidate = out[i] + noise;
        // A mutation that would silence a live gene is discarded.
        if (std::abs(candidate) <= tol) {
            continue;
        }
        out[i] = candidate;
    }
    return WeightVector(std::move(out));
}

WeightVector aggregate_elites(std::span<const Phenotype> elites,
                              const FitnessWeights& fw) {
    if (elites.empty()) {
        throw StateError("aggregate_elites: empty elite set");
    }
    double sum = 0.0;
    std::vector<double> scores(elites.size());
    for (std::size_t i = 0; i < elites.size(); ++i) {
        scores[i] = elites[i].fitness ? *elites[i].fitness : fitness(elites[i], fw);
        sum += scores[i];
    }
    if (std::abs(sum) <= kDegenerateFitnessSum) {
        throw DegenerateFitness("aggregate_elites: elite fitness sum is zero");
    }
    std::vector<double> coeffs(elites.size());
    std::vector<WeightVector> vectors;
    vectors.reserve(elites.size());
    for (std::size_t i = 0; i < elites.size(); ++i) {
        coeffs[i] = scores[i] / sum;
        vectors.push_back(elites[i].weights);
    }
    return axpy_combine(coeffs, vectors);
}

GenerationResult evolve(std::vector<Phenotype> pop,
                        const EvolutionConfig& cfg,
                        const FitnessWeights& fw,
                        const MetricConfig& metric_cfg,
                        SeededRng& rng,
                        int generation_index) {
    if (pop.empty()) {
        throw StateError("evolve: empty population");
    }
    cfg.validate();

    for (Phenotype& p : pop) {
        p.fitness = fitness(p, fw);
    }
    const std::vector<std::size_t> ranking = rank_population(pop, fw);
    const std::vector<std::size_t> elite_idx = select_elites(pop, ranking, cfg);
    const int elite_count = static_cast<int>(elite_idx.size());
    const int total = static_cast<int>(pop.size());

    std::vector<Phenotype> elites;
    elites.reserve(elite_idx.size());
    for (std::size_t idx : elite_idx) {
        elites.push_back(pop[idx]);
    }

    GenerationStats stats;
    stats.best_fitness = *pop[ranking.front()].fitness;
    double fitness_sum = 0.0;
    for (const Phenotype& p : pop) {
        fitness_sum += *p.fitness;
    }
    stats.mean_fitness = fitness_sum / static_cast<double>(total);
    for (const Phenotype& e : elites) {
        stats.elite_ids.push_back(e.id);
    }

    // Elites survive unchanged; offspring of elite parent pairs restore N.
    std::vector<Phenotype> next_pop = elites;
    next_pop.reserve(pop.size());
    for (int k = 0; k < total - elite_count; ++k) {
        std::size_t a = rng.uniform_index(static_cast<std::uint64_t>(elite_count));
        std::size_t b = a;
        if (elite_count >= 2) {
            b = rng.uniform_index(static_cast<std::uint64_t>(elite_count - 1));
            if (b >= a) ++b;
        }
        const Phenotype& parent_a = elites[a];
        const Phenotype& parent_b = elites[b];

        Phenotype child;
        child.id = offspring_id(generation_index, k);
        child.weights = mutate(uniform_crossover(parent_a, parent_b, rng), cfg, metric_cfg, rng);
        TrainingMeta meta = parent_a.genotype.training;
        meta.accuracy.reset();
        meta.loss.reset();
        // Stability treats parent_a's weights as the previous checkpoint.
        child.genotype = genotype_of(child.weights, &parent_a.weights, metric_cfg, meta);
        child.fitness = fitness(child, fw);
        next_pop.push_back(std::move(child));
    }

    WeightVector global;
    try {
        global = aggregate_elites(elites, fw);
    } catch (const DegenerateFitness&) {
        // Documented fallback: unweighted mean of the elite set.
        std::vector<double> coeffs(elites.size(), 1.0 / static_cast<double>(elites.size()));
        std::vector<WeightVector> vectors;
        vectors.reserve(elites.size());
        for (const Phenotype& e : elites) {
            vectors.push_back(e.weights);
        }
        global = axpy_combine(coeffs, vectors);
        stats.degenerate_fitness_fallback = true;
        log::warn("evolve: degenerate elite fitness sum, falling back to unweighted elite mean");
    }

    return GenerationResult{std::move(next_pop), std::move(global), std::move(stats)};
}

EvolutionRun run_evolution(std::vector<Phenotype> pop,
                           const EvolutionConfig& cfg,
                           const FitnessWeights& fw,
                           const MetricConfig& metric_cfg,
                           SeededRng& rng) {
    cfg.validate();
    EvolutionRun run;
    GenerationResult result;
    for (int g = 0; g < cfg.generations; ++g) {
        result = evolve(std::move(pop), cfg, fw, metric_cfg, rng, g);
        pop = result.population;
        run.generations.push_back(result.stats);
    }
    run.population = std::move(result.population);
    run.global_model = std::move(result.global_model);
    return run;
}

}  // namespace fedlab

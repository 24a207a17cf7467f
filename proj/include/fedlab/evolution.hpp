#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedlab/metrics.hpp"
#include "fedlab/weights.hpp"

namespace fedlab {

// One candidate model in the population: weights plus derived metadata.
struct Phenotype {
    std::string id;
    WeightVector weights;
    Genotype genotype;
    std::optional<double> fitness;
};

// How the fitness score handles the health term. The non-positive health
// metric makes a literal 1/health reading singular near zero and reward worse
// health, so the default maps health h to 1/(1-h): positive, bounded by the
// coefficient, strictly increasing in health. LiteralGuarded keeps 1/h with
// |h| floored at 1e-6 for fidelity experiments.
enum class HealthTermMode { Bounded, LiteralGuarded };

struct FitnessWeights {
    double epsilon = 0.5;  // sparsity-term coefficient
    double beta = 0.3;     // stability coefficient
    double gamma = 0.2;    // health coefficient
    HealthTermMode health_term_mode = HealthTermMode::Bounded;

    // Coefficients must be non-negative, monotonically decreasing
    // (epsilon >= beta >= gamma) and not all zero.
    void validate() const;
};

// Elite-set size given either as a fraction of the population or an absolute
// count. A fraction lambda resolves to ceil(lambda * N); a count to
// min(count, N). The resolved size is always at least 1.
struct EliteSpec {
    enum class Kind { Fraction, Count };
    Kind kind = Kind::Count;
    double fraction = 0.0;
    int count = 2;

    static EliteSpec from_fraction(double lambda);
    static EliteSpec from_count(int count);
    int resolve(int population_size) const;
};

struct EvolutionConfig {
    EliteSpec elites = EliteSpec::from_count(2);
    double mutation_rate = 0.01;
    double mutation_noise_scale = 0.01;
    int generations = 1;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// Fitness F = eps*(1 - sparsity) + beta*stability + gamma*health_term,
// computed from the phenotype's genotype (the cached fitness field is
// ignored). Throws NumericError if the score comes out non-finite.
double fitness(const Phenotype& p, const FitnessWeights& fw);

// Index permutation ordering the population by decreasing fitness, ties
// broken by ascending phenotype id. Uses each phenotype's cached fitness
// when present, otherwise computes it from the genotype.
// Throws StateError on an empty population.
std::vector<std::size_t> rank_population(std::span<const Phenotype> pop,
                                         const FitnessWeights& fw);

// First E entries of the ranking; the top-fitness phenotype is always kept.
std::vector<std::size_t> select_elites(std::span<const Phenotype> pop,
                                       std::span<const std::size_t> ranking,
                                       const EvolutionConfig& cfg);

// Each offspring coordinate is copied from parent_a or parent_b with
// probability 1/2, independently. Throws DimensionError on length mismatch.
WeightVector uniform_crossover(const Phenotype& parent_a,
                               const Phenotype& parent_b,
                               SeededRng& rng);

// Each coordinate mutates with probability mutation_rate by adding uniform
// noise from [-scale, +scale]. A mutated coordinate that was within
// zero_tolerance of 0 is reset to exactly 0, and a mutation that would push a
// live coordinate into the near-zero band is discarded, so the mask of
// near-zero coordinates (the genome's Hamming weight) is preserved exactly.
WeightVector mutate(const WeightVector& w,
                    const EvolutionConfig& cfg,
                    const MetricConfig& metric_cfg,
                    SeededRng& rng);

// Fitness-normalized convex combination of the elite weight vectors:
// sum_i [F_i / sum_j F_j] * w_i. Throws DegenerateFitness when the fitness
// sum is (numerically) zero; the caller falls back to an unweighted mean.
WeightVector aggregate_elites(std::span<const Phenotype> elites,
                              const FitnessWeights& fw);

struct GenerationStats {
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    std::vector<std::string> elite_ids;
    // Set when the elite fitness sum was degenerate and the global model fell
    // back to the unweighted elite mean.
    bool degenerate_fitness_fallback = false;
};

struct GenerationResult {
    std::vector<Phenotype> population;
    WeightVector global_model;
    GenerationStats stats;
};

// One generation: score, rank, select elites, refill the population with
// crossover+mutation offspring of elite parent pairs (elites carried over
// unchanged), recompute offspring genotypes (stability against parent_a),
// and aggregate the elites into the global model. generation_index only
// namespaces offspring ids.
GenerationResult evolve(std::vector<Phenotype> pop,
                        const EvolutionConfig& cfg,
                        const FitnessWeights& fw,
                        const MetricConfig& metric_cfg,
                        SeededRng& rng,
                        int generation_index = 0);

struct EvolutionRun {
    std::vector<Phenotype> population;
    WeightVector global_model;
    std::vector<GenerationStats> generations;
};

// Runs cfg.generations generations and returns the final state.
EvolutionRun run_evolution(std::vector<Phenotype> pop,
                           const EvolutionConfig& cfg,
                           const FitnessWeights& fw,
                           const MetricConfig& metric_cfg,
                           SeededRng& rng);

}  // namespace fedlab

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedlab/evolution.hpp"
#include "fedlab/metrics.hpp"
#include "fedlab/weights.hpp"

namespace fedlab {

enum class StrategyKind { FedAvg, FedSgd, FedAvgen };

std::string strategy_name(StrategyKind kind);
StrategyKind strategy_from_name(const std::string& name);

// One client's contribution to a round. Weight-sharing strategies carry
// trained weights; gradient strategies carry a gradient at the global model.
struct ClientUpdate {
    enum class Payload { Weights, Gradients };

    std::string client_id;
    Payload payload_kind = Payload::Weights;
    WeightVector payload;
    long long num_samples = 1;  // basis of the importance weighting
    double local_loss = 0.0;
    std::optional<Genotype> genotype;
};

struct StrategyConfig {
    StrategyKind kind = StrategyKind::FedAvg;
    double participation_fraction = 1.0;
    double server_learning_rate = 1.0;  // FedSGD global step size
    std::optional<EvolutionConfig> evolution;
    std::optional<FitnessWeights> fitness_weights;

    // Evolution settings must be present exactly for FedAvgen.
    void validate() const;
};

// ceil(tau * N) distinct client ids drawn uniformly without replacement.
std::vector<std::string> sample_participants(std::span<const std::string> clients,
                                             double tau,
                                             SeededRng& rng);

// Importance-weighted mean of client weights, importance = sample-count
// fraction. Throws PayloadError on any gradient payload.
WeightVector fedavg_aggregate(std::span<const ClientUpdate> updates);

// Sample-count weighted gradient combine followed by one global step:
// global - lr * g. Throws PayloadError on any weights payload.
WeightVector fedsgd_aggregate(std::span<const ClientUpdate> updates,
                              const WeightVector& global,
                              double lr);

// Builds a phenotype population from the updates (recomputing genotypes when
// absent), runs the configured number of evolution generations, and returns
// the fitness-weighted elite aggregate as the global model.
WeightVector fedavgen_aggregate(std::span<const ClientUpdate> updates,
                                const StrategyConfig& cfg,
                                const MetricConfig& metric_cfg,
                                SeededRng& rng);

}  // namespace fedlab

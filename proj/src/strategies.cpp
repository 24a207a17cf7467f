#include "fedlab/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "fedlab/errors.hpp"
#include "fedlab/log.hpp"

namespace fedlab {

std::string strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::FedAvg: return "fedavg";
        case StrategyKind::FedSgd: return "fedsgd";
        case StrategyKind::FedAvgen: return "fedavgen";
    }
    throw StateError("strategy_name: unknown strategy kind");
}

StrategyKind strategy_from_name(const std::string& name) {
    if (name == "fedavg") return StrategyKind::FedAvg;
    if (name == "fedsgd") return StrategyKind::FedSgd;
    if (name == "fedavgen") return StrategyKind::FedAvgen;
    throw ConfigError("unknown strategy '" + name + "' (expected fedavg, fedsgd or fedavgen)");
}

void StrategyConfig::validate() const {
    if (!(participation_fraction > 0.0 && participation_fraction <= 1.0)) {
        throw ConfigError("StrategyConfig: participation_fraction must lie in (0, 1]");
    }
    if (!(server_learning_rate > 0.0)) {
        throw ConfigError("StrategyConfig: server_learning_rate must be positive");
    }
    const bool has_evolution = evolution.has_value() && fitness_weights.has_value();
    if (kind == StrategyKind::FedAvgen) {
        if (!has_evolution) {
            throw ConfigError("StrategyConfig: fedavgen requires evolution and fitness settings");
        }
        evolution->validate();
        fitness_weights->validate();
    } else if (evolution.has_value() || fitness_weights.has_value()) {
        throw ConfigError("StrategyConfig: evolution settings are only valid for fedavgen");
    }
}

std::vector<std::string> sample_participants(std::span<const std::string> clients,
                                             double tau,
                                             SeededRng& rng) {
    if (clients.empty()) {
        throw DimensionError("sample_participants: no clients");
    }
    if (!(tau > 0.0 && tau <= 1.0)) {
        throw ConfigError("sample_participants: tau must lie in (0, 1]");
    }
    const int n = static_cast<int>(clients.size());
    const int k = std::clamp(static_cast<int>(std::ceil(tau * n - 1e-9)), 1, n);
    std::vector<std::string> pool(clients.begin(), clients.end());
    // Partial Fisher-Yates: the first k slots are the sample.
    for (int i = 0; i < k; ++i) {
        const std::size_t j = i + rng.uniform_index(static_cast<std::uint64_t>(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

namespace {

void require_payload(std::span<const ClientUpdate> updates,
                     ClientUpdate::Payload expected,
                     const char* op) {
    for (const ClientUpdate& u : updates) {
        if (u.payload_kind != expected) {
            throw PayloadError(std::string(op) + ": unexpected payload kind from client '" +
                               u.client_id + "'");
        }
        if (u.num_samples < 1) {
            throw PayloadError(std::string(op) + ": client '" + u.client_id +
                               "' reports no samples");
        }
    }
}

std::vector<double> importance_coefficients(std::span<const ClientUpdate> updates) {
    long long total = 0;
    for (const ClientUpdate& u : updates) {
        total += u.num_samples;
    }
    std::vector<double> coeffs(updates.size());
    for (std::size_t i = 0; i < updates.size(); ++i) {
        coeffs[i] = static_cast<double>(updates[i].num_samples) / static_cast<double>(total);
    }
    return coeffs;
}

}  // namespace

WeightVector fedavg_aggregate(std::span<const ClientUpdate> updates) {
    if (updates.empty()) {
        throw DimensionError("fedavg_aggregate: no updates");
    }
    require_payload(updates, ClientUpdate::Payload::Weights, "fedavg_aggregate");
    const std::vector<double> coeffs = importance_coefficients(updates);
    std::vector<WeightVector> vectors;
    vectors.reserve(updates.size());
    for (const ClientUpdate& u : updates) {
        vectors.push_back(u.payload);
    }
    return axpy_combine(coeffs, vectors);
}

WeightVector fedsgd_aggregate(std::span<const ClientUpdate> updates,
                              const WeightVector& global,
                              double lr) {
    if (updates.empty()) {
        throw DimensionError("fedsgd_aggregate: no updates");
    }
    require_payload(updates, ClientUpdate::Payload::Gradients, "fedsgd_aggregate");
    for (const ClientUpdate& u : updates) {
        if (u.payload.size() != global.size()) {
            throw DimensionError("fedsgd_aggregate: gradient length does not match the global model");
        }
    }
    const std::vector<double> coeffs = importance_coefficients(updates);
    std::vector<WeightVector> vectors;
    vectors.reserve(updates.size() + 1);
    std::vector<double> all_coeffs;
    all_coeffs.reserve(updates.size() + 1);
    // global - lr * sum_i I_i * g_i, as one combined axpy.
    vectors.push_back(global);
    all_coeffs.push_back(1.0);
    for (std::size_t i = 0; i < updates.size(); ++i) {
        vectors.push_back(updates[i].payload);
        all_coeffs.push_back(-lr * coeffs[i]);
    }
    return axpy_combine(all_coeffs, vectors);
}

WeightVector fedavgen_aggregate(std::span<const ClientUpdate> updates,
                                const StrategyConfig& cfg,
                                const MetricConfig& metric_cfg,
                                SeededRng& rng) {
    if (updates.empty()) {
        throw DimensionError("fedavgen_aggregate: no updates");
    }
    cfg.validate();
    if (cfg.kind != StrategyKind::FedAvgen) {
        throw ConfigError("fedavgen_aggregate: config is not a fedavgen config");
    }
    require_payload(updates, ClientUpdate::Payload::Weights, "fedavgen_aggregate");

    std::vector<Phenotype> population;
    population.reserve(updates.size());
    for (const ClientUpdate& u : updates) {
        Phenotype p;
        p.id = u.client_id;
        p.weights = u.payload;
        if (u.genotype.has_value()) {
            p.genotype = *u.genotype;
        } else {
            // No metadata shipped with the update: derive it from the weights.
            TrainingMeta meta;
            meta.loss = u.local_loss;
            p.genotype = genotype_of(u.payload, nullptr, metric_cfg, meta);
        }
        population.push_back(std::move(p));
    }

    EvolutionRun run = run_evolution(std::move(population), *cfg.evolution,
                                     *cfg.fitness_weights, metric_cfg, rng);
    for (const GenerationStats& stats : run.generations) {
        if (stats.degenerate_fitness_fallback) {
            log::warn("fedavgen_aggregate: degenerate fitness sum, used unweighted elite mean");
        }
    }
    return run.global_model;
}

}  // namespace fedlab

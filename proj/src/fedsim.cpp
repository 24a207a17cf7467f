#include "fedlab/fedsim.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <utility>

#include "fedlab/errors.hpp"

namespace fedlab {
namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(now - start).count();
}

std::string client_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "client%03d", index);
    return buf;
}

/**
 * Closed-form server-side MAC model for one aggregation, with L the
 * parameter count and K the participant count.
 *
 * FedAvg scales and accumulates K vectors: K*L. FedSGD combines K gradients
 * and applies one global step: (K+1)*L. The evolutionary aggregate pays, per
 * generation, 8*L for each of the O = K-E offspring (crossover L, mutation
 * L, metric recomputation 6L: two norms for sparsity, two moment passes,
 * two norms for stability) plus E*L for the elite aggregation.
 */
long long fedavg_server_macs(int participants, long long params) {
    return static_cast<long long>(participants) * params;
}

long long fedsgd_server_macs(int participants, long long params) {
    return static_cast<long long>(participants + 1) * params;
}

long long fedavgen_server_macs(int participants, long long params,
                               const EvolutionConfig& evo) {
    const long long elites = evo.elites.resolve(participants);
    const long long offspring = participants - elites;
    const long long per_generation = offspring * 8 * params + elites * params;
    return evo.generations * per_generation;
}

}  // namespace

MlpArch ExperimentConfig::arch() const {
    MlpArch a;
    a.dims.push_back(dim);
    a.dims.insert(a.dims.end(), hidden.begin(), hidden.end());
    a.dims.push_back(num_classes);
    return a;
}

StrategyConfig ExperimentConfig::strategy_config(StrategyKind kind) const {
    StrategyConfig sc;
    sc.kind = kind;
    sc.participation_fraction = participation_fraction;
    sc.server_learning_rate = server_learning_rate;
    if (kind == StrategyKind::FedAvgen) {
        sc.evolution = evolution;
        sc.fitness_weights = fitness_weights;
    }
    return sc;
}

void ExperimentConfig::validate() const {
    if (clients < 1) throw ConfigError("experiment: clients must be >= 1");
    if (samples_per_client < 1) {
        throw ConfigError("experiment: samples_per_client must be >= 1");
    }
    if (dim < 1) throw ConfigError("experiment: dim must be >= 1");
    if (num_classes < 2) throw ConfigError("experiment: num_classes must be >= 2");
    if (num_classes > 2 * dim) {
        throw ConfigError("experiment: num_classes must be <= 2*dim");
    }
    if (!(skew >= 0.0 && skew <= 1.0)) {
        throw ConfigError("experiment: skew must be in [0, 1]");
    }
    if (holdout_samples < 1) {
        throw ConfigError("experiment: holdout_samples must be >= 1");
    }
    if (!(center_radius > 0.0)) throw ConfigError("experiment: center_radius must be > 0");
    if (!(spread > 0.0)) throw ConfigError("experiment: spread must be > 0");
    if (!(learning_rate > 0.0)) throw ConfigError("experiment: learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("experiment: batch_size must be >= 1");
    if (local_epochs < 0) throw ConfigError("experiment: local_epochs must be >= 0");
    if (!(participation_fraction > 0.0 && participation_fraction <= 1.0)) {
        throw ConfigError("experiment: participation_fraction must be in (0, 1]");
    }
    if (!(server_learning_rate > 0.0)) {
        throw ConfigError("experiment: server_learning_rate must be > 0");
    }
    if (fedsgd_gradient_batch < 0) {
        throw ConfigError("experiment: fedsgd_gradient_batch must be >= 0");
    }
    if (rounds < 0) throw ConfigError("experiment: rounds must be >= 0");
    if (strategies.empty()) throw ConfigError("experiment: strategies must be nonempty");
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        for (std::size_t j = i + 1; j < strategies.size(); ++j) {
            if (strategies[i] == strategies[j]) {
                throw ConfigError("experiment: duplicate strategy " +
                                  strategy_name(strategies[i]));
            }
        }
    }
    arch().validate();
    fitness_weights.validate();
    evolution.validate();
    metrics.validate();
}

ClientState::ClientState(std::string id, SyntheticDataset data, const MlpArch& arch)
    : client_id(std::move(id)),
      shard(std::move(data)),
      model(arch),
      optimizer(model.params().size()) {}

ClientUpdate local_train(ClientState& client,
                         const WeightVector& global,
                         int epochs,
                         int batch_size,
                         double lr,
                         const MetricConfig& metric_cfg,
                         SeededRng& rng) {
    if (client.shard.num_samples() == 0) {
        throw StateError("local_train: client " + client.client_id + " has an empty shard");
    }
    if (epochs < 0) throw ConfigError("local_train: epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("local_train: batch_size must be >= 1");

    client.model.set_weights(global);
    // Broadcast weights invalidate any moment estimates from earlier rounds.
    client.optimizer = AdamState(client.model.params().size());
    AdamConfig adam;
    adam.learning_rate = lr;

    const int n = client.shard.num_samples();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    long long macs = 0;
    double final_epoch_loss = 0.0;

    if (epochs == 0) {
        // Nothing trains; report the forward loss and a trivially stable pair.
        final_epoch_loss = client.model.loss(client.shard, order, &macs);
        client.prev_epoch_weights = client.model.weights();
    } else {
        std::vector<double> grad;
        for (int e = 0; e < epochs; ++e) {
            // Snapshot the last epoch boundary so stability spans exactly the
            // final epoch of this round.
            if (e == epochs - 1) client.prev_epoch_weights = client.model.weights();

            for (int i = n; i > 1; --i) {
                const int j = static_cast<int>(rng.uniform_index(i));
                std::swap(order[i - 1], order[j]);
            }

            double epoch_loss_sum = 0.0;
            int batches = 0;
            for (int start = 0; start < n; start += batch_size) {
                const int len = std::min(batch_size, n - start);
                const std::span<const int> batch(order.data() + start,
                                                 static_cast<std::size_t>(len));
                const double batch_loss =
                    client.model.loss_and_gradient(client.shard, batch, grad, &macs);
                client.optimizer.step(client.model.mutable_params(), grad, adam);
                epoch_loss_sum += batch_loss;
                ++batches;
            }
            if (e == epochs - 1) final_epoch_loss = epoch_loss_sum / batches;
        }
    }

    client.mac_counter += macs;

    TrainingMeta meta;
    meta.loss = final_epoch_loss;
    meta.epochs_trained = epochs;
    meta.learning_rate = lr;
    meta.batch_size = batch_size;

    const WeightVector w = client.model.weights();
    ClientUpdate update;
    update.client_id = client.client_id;
    update.payload_kind = ClientUpdate::Payload::Weights;
    update.payload = w;
    update.num_samples = n;
    update.local_loss = final_epoch_loss;
    update.genotype = genotype_of(w, &client.prev_epoch_weights, metric_cfg, meta);
    return update;
}

ClientUpdate local_gradient(ClientState& client,
                            const WeightVector& global,
                            int batch_size,
                            SeededRng& rng) {
    if (client.shard.num_samples() == 0) {
        throw StateError("local_gradient: client " + client.client_id +
                         " has an empty shard");
    }
    if (batch_size < 0) throw ConfigError("local_gradient: batch_size must be >= 0");

    client.model.set_weights(global);
    const int n = client.shard.num_samples();

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (batch_size > 0 && batch_size < n) {
        // Distinct random samples: partial Fisher-Yates, keep the prefix.
        for (int i = 0; i < batch_size; ++i) {
            const int j = i + static_cast<int>(rng.uniform_index(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(batch_size);
    }

    long long macs = 0;
    std::vector<double> grad;
    const double loss = client.model.loss_and_gradient(client.shard, idx, grad, &macs);
    client.mac_counter += macs;

    ClientUpdate update;
    update.client_id = client.client_id;
    update.payload_kind = ClientUpdate::Payload::Gradients;
    update.payload = WeightVector(std::move(grad));
    update.num_samples = static_cast<long long>(idx.size());
    update.local_loss = loss;
    return update;
}

EvalResult evaluate_global(const WeightVector& global,
                           const MlpArch& arch,
                           const SyntheticDataset& holdout) {
    arch.validate();
    if (global.size() != arch.param_count()) {
        throw DimensionError("evaluate_global: weight vector has " +
                             std::to_string(global.size()) + " parameters, architecture needs " +
                             std::to_string(arch.param_count()));
    }
    MlpModel model(arch);
    model.set_weights(global);
    return evaluate(model, holdout);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, StrategyKind kind) {
    cfg.validate();
    const MlpArch arch = cfg.arch();
    const long long params = static_cast<long long>(arch.param_count());
    const SeededRng root(cfg.seed);

    // Independent streams: data and initialization depend only on the seed,
    // so every strategy at a given seed sees the same task and start point.
    SeededRng data_rng = root.child(0);
    Federation fed = generate_federation(cfg.clients, cfg.samples_per_client, cfg.dim,
                                         cfg.num_classes, cfg.skew, data_rng,
                                         cfg.holdout_samples, cfg.center_radius,
                                         cfg.spread);

    SeededRng init_rng = root.child(1);
    WeightVector global = MlpModel::he_init(arch, init_rng).weights();

    std::vector<ClientState> clients;
    std::vector<std::string> ids;
    clients.reserve(cfg.clients);
    for (int c = 0; c < cfg.clients; ++c) {
        clients.emplace_back(client_name(c), std::move(fed.shards[c]), arch);
        ids.push_back(clients.back().client_id);
    }

    const StrategyConfig strat = cfg.strategy_config(kind);
    strat.validate();
    const SeededRng sampling_root = root.child(2);
    const SeededRng client_root = root.child(3);
    const SeededRng evolution_root = root.child(4);

    ExperimentResult result;
    result.strategy = kind;
    const auto experiment_start = std::chrono::steady_clock::now();

    for (int r = 0; r < cfg.rounds; ++r) {
        const auto round_start = std::chrono::steady_clock::now();

        SeededRng sampling_rng = sampling_root.child(r);
        std::vector<std::string> participants =
            sample_participants(ids, cfg.participation_fraction, sampling_rng);
        std::sort(participants.begin(), participants.end());

        long long client_macs = 0;
        std::vector<ClientUpdate> updates;
        updates.reserve(participants.size());
        for (const std::string& id : participants) {
            const int c = static_cast<int>(
                std::find(ids.begin(), ids.end(), id) - ids.begin());
            ClientState& client = clients[c];
            // Each client owns stream (client index, round); results cannot
            // depend on the order clients run in.
            SeededRng client_rng = client_root.child(c).child(r);
            const auto client_start = std::chrono::steady_clock::now();
            const long long before = client.mac_counter;

            ClientUpdate u =
                (kind == StrategyKind::FedSgd)
                    ? local_gradient(client, global, cfg.fedsgd_gradient_batch,
                                     client_rng)
                    : local_train(client, global, cfg.local_epochs, cfg.batch_size,
                                  cfg.learning_rate, cfg.metrics, client_rng);

            client.cpu_seconds += seconds_since(client_start);
            client_macs += client.mac_counter - before;
            updates.push_back(std::move(u));
        }

        // Aggregation order is fixed by id regardless of scheduling.
        std::sort(updates.begin(), updates.end(),
                  [](const ClientUpdate& a, const ClientUpdate& b) {
                      return a.client_id < b.client_id;
                  });
        const int k = static_cast<int>(updates.size());

        long long server_macs = 0;
        switch (kind) {
            case StrategyKind::FedAvg:
                global = fedavg_aggregate(updates);
                server_macs = fedavg_server_macs(k, params);
                break;
            case StrategyKind::FedSgd:
                global = fedsgd_aggregate(updates, global, cfg.server_learning_rate);
                server_macs = fedsgd_server_macs(k, params);
                break;
            case StrategyKind::FedAvgen: {
                SeededRng evolution_rng = evolution_root.child(r);
                global = fedavgen_aggregate(updates, strat, cfg.metrics, evolution_rng);
                server_macs = fedavgen_server_macs(k, params, cfg.evolution);
                break;
            }
        }

        const EvalResult eval = evaluate_global(global, arch, fed.holdout);

        RoundRecord rec;
        rec.round = r + 1;
        rec.strategy = kind;
        rec.accuracy = eval.accuracy;
        rec.loss = eval.loss;
        rec.client_macs = client_macs;
        rec.server_macs = server_macs;
        rec.wall_seconds = cfg.timing ? seconds_since(round_start) : 0.0;
        result.rounds.push_back(rec);
    }

    result.final_weights = global;
    result.final_eval = evaluate_global(global, arch, fed.holdout);
    result.total_wall_seconds = seconds_since(experiment_start);
    return result;
}

}  // namespace fedlab

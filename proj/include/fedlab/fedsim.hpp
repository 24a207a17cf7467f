#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedlab/dataset.hpp"
#include "fedlab/mlp.hpp"
#include "fedlab/strategies.hpp"

namespace fedlab {

/**
 * Full experiment description. Defaults describe the desk-scale reference
 * task: 10 clients, a 3-class Gaussian mixture in 16 dimensions with mild
 * label skew, a one-hidden-layer MLP, 5 local Adam epochs per round, and 30
 * federated rounds.
 */
struct ExperimentConfig {
    // Federation and task shape
    int clients = 10;
    int samples_per_client = 32;
    int dim = 16;
    int num_classes = 3;
    double skew = 0.3;
    int holdout_samples = 512;
    double center_radius = 4.0;
    double spread = 1.0;

    // Local training
    std::vector<int> hidden = {32};
    double learning_rate = 0.001;
    int batch_size = 32;
    int local_epochs = 5;

    // Federation dynamics
    double participation_fraction = 1.0;
    double server_learning_rate = 1.0;
    // Samples per client for the gradient strategy; 0 means the full shard.
    int fedsgd_gradient_batch = 0;

    // Evolutionary aggregation knobs
    FitnessWeights fitness_weights;
    EvolutionConfig evolution;
    MetricConfig metrics;

    // Run shape
    int rounds = 30;
    std::uint64_t seed = 0;
    std::vector<StrategyKind> strategies = {StrategyKind::FedAvg,
                                            StrategyKind::FedSgd,
                                            StrategyKind::FedAvgen};
    // When false, per-round wall-clock fields are written as 0 so emitted
    // tables are byte-stable across reruns; totals are always measured.
    bool timing = false;

    MlpArch arch() const;  // [dim, hidden..., num_classes]
    StrategyConfig strategy_config(StrategyKind kind) const;
    void validate() const;  // throws ConfigError
};

/**
 * Per-client simulation state. The model is re-seeded from the broadcast
 * global weights at the start of every round, and the optimizer restarts
 * with it (stale Adam moments do not describe the new weights); the shard
 * and the compute counters persist across rounds. mac_counter only grows.
 */
struct ClientState {
    std::string client_id;
    SyntheticDataset shard;
    MlpModel model;
    AdamState optimizer;
    WeightVector prev_epoch_weights;
    long long mac_counter = 0;
    double cpu_seconds = 0.0;

    ClientState(std::string id, SyntheticDataset data, const MlpArch& arch);
};

// One row of the experiment log. MAC fields are per-round deltas summed over
// the round's participants (client) and the aggregation work (server).
struct RoundRecord {
    int round = 0;  // 1-based
    StrategyKind strategy = StrategyKind::FedAvg;
    double accuracy = 0.0;
    double loss = 0.0;
    long long client_macs = 0;
    long long server_macs = 0;
    double wall_seconds = 0.0;
};

/**
 * Runs `epochs` of minibatch Adam on the client's shard starting from
 * `global`, snapshotting the weights at the last epoch boundary so the
 * stability metric in the returned genotype spans the final epoch. The
 * reported local loss is the mean minibatch loss of that final epoch
 * (epochs=0 trains nothing and reports the loss of one forward pass).
 * Minibatch order is drawn from `rng`; the client's mac_counter grows by the
 * exact forward+backward cost.
 */
ClientUpdate local_train(ClientState& client,
                         const WeightVector& global,
                         int epochs,
                         int batch_size,
                         double lr,
                         const MetricConfig& metric_cfg,
                         SeededRng& rng);

/**
 * One cross-entropy gradient evaluated at the broadcast global weights, with
 * no local update. batch_size 0 uses the whole shard (consuming no RNG);
 * a positive batch_size draws that many distinct samples from `rng`. The
 * mac_counter grows by the forward+backward cost of the single pass.
 */
ClientUpdate local_gradient(ClientState& client,
                            const WeightVector& global,
                            int batch_size,
                            SeededRng& rng);

// Holdout accuracy and mean loss of a flat weight vector under the given
// architecture. Pure and RNG-free. Throws DimensionError when the vector
// length does not match the architecture.
EvalResult evaluate_global(const WeightVector& global,
                           const MlpArch& arch,
                           const SyntheticDataset& holdout);

struct ExperimentResult {
    StrategyKind strategy = StrategyKind::FedAvg;
    std::vector<RoundRecord> rounds;
    WeightVector final_weights;
    EvalResult final_eval;  // evaluation of final_weights on the holdout
    double total_wall_seconds = 0.0;
};

/**
 * Runs one strategy for cfg.rounds rounds and returns the round log.
 *
 * The data and the initial global model depend only on cfg.seed, never on
 * the strategy, so curves for different strategies at the same seed start
 * from identical state. Per-round flow: broadcast -> every participant
 * trains (weight strategies) or evaluates a gradient (FedSGD) ->
 * aggregate -> evaluate on the holdout -> append a RoundRecord.
 */
ExperimentResult run_experiment(const ExperimentConfig& cfg, StrategyKind kind);

}  // namespace fedlab

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedlab/dataset.hpp"
#include "fedlab/weights.hpp"

namespace fedlab {

/**
 * Fully connected network shape: dims = [input, hidden..., output].
 *
 * Parameters flatten layer by layer, each layer's weight matrix first
 * (row-major, [out x in]) followed by its bias vector. Every producer and
 * consumer of flat weight vectors relies on this one ordering.
 */
struct MlpArch {
    std::vector<int> dims;

    void validate() const;  // throws ConfigError

    int num_layers() const { return static_cast<int>(dims.size()) - 1; }
    std::size_t param_count() const;

    // Multiply-accumulate operations for one forward pass of one sample
    // (matrix-vector products only; bias adds and activations are not MACs).
    long long forward_macs_per_sample() const;

    bool operator==(const MlpArch& other) const = default;
};

// Numerically stable in-place softmax (subtracts the max before exp).
void softmax_inplace(std::vector<double>& z);

/**
 * Multilayer perceptron with ReLU hidden activations and a linear output
 * layer, trained against softmax cross-entropy. Parameters live in one flat
 * buffer in the canonical MlpArch order, so snapshots and restores are plain
 * copies.
 */
class MlpModel {
public:
    explicit MlpModel(MlpArch arch);  // zero-initialized parameters

    // He-style initialization: weights ~ N(0, 2/fan_in), biases zero.
    static MlpModel he_init(MlpArch arch, SeededRng& rng);

    const MlpArch& arch() const { return arch_; }
    const std::vector<double>& params() const { return params_; }
    std::vector<double>& mutable_params() { return params_; }

    WeightVector weights() const;
    // Throws ArchitectureMismatch if the length does not fit this shape.
    void set_weights(const WeightVector& w);

    // Output-layer logits for one sample.
    void logits(std::span<const double> x, std::vector<double>& out) const;

    // Predicted class: argmax of the logits, lowest index on ties.
    int predict(std::span<const double> x) const;

    /**
     * Mean cross-entropy loss and its gradient over the given samples.
     * grad is resized to param_count() and uses the canonical flat order.
     *
     * If macs is non-null it is incremented by the cost of the pass under the
     * standard "backward = 2x forward" convention: per sample, the forward
     * matrix-vector products cost F MACs, backpropagating deltas costs F, and
     * forming weight-gradient outer products costs F again, for 3F in total.
     */
    double loss_and_gradient(const SyntheticDataset& data,
                             std::span<const int> sample_indices,
                             std::vector<double>& grad,
                             long long* macs = nullptr) const;

    // Mean cross-entropy loss only (forward passes; F MACs per sample).
    double loss(const SyntheticDataset& data,
                std::span<const int> sample_indices,
                long long* macs = nullptr) const;

private:
    MlpArch arch_;
    std::vector<double> params_;
    std::vector<std::size_t> weight_offsets_;
    std::vector<std::size_t> bias_offsets_;
};

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
    long long macs = 0;
};

// Mean loss and top-1 accuracy over a whole dataset. Pure: the model and the
// data are untouched. Throws DimensionError on an empty dataset.
EvalResult evaluate(const MlpModel& model, const SyntheticDataset& data);

struct AdamConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;  // throws ConfigError
};

// Adam optimizer state (first/second moment estimates plus the step count).
// One instance per trained model; step() applies one update in place.
struct AdamState {
    explicit AdamState(std::size_t param_count);

    void step(std::vector<double>& params,
              const std::vector<double>& grad,
              const AdamConfig& cfg);

    std::vector<double> m;
    std::vector<double> v;
    long long t = 0;
};

}  // namespace fedlab

#include "fedlab/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "fedlab/errors.hpp"

namespace fedlab {

void MlpArch::validate() const {
    if (dims.size() < 2) {
        throw ConfigError("MlpArch: need at least input and output dims");
    }
    for (int d : dims) {
        if (d < 1) throw ConfigError("MlpArch: every layer width must be >= 1");
    }
}

std::size_t MlpArch::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        n += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
    }
    return n;
}

long long MlpArch::forward_macs_per_sample() const {
    long long n = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        n += static_cast<long long>(dims[l]) * dims[l + 1];
    }
    return n;
}

void softmax_inplace(std::vector<double>& z) {
    if (z.empty()) throw DimensionError("softmax over empty vector");
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

MlpModel::MlpModel(MlpArch arch) : arch_(std::move(arch)) {
    arch_.validate();
    params_.assign(arch_.param_count(), 0.0);
    std::size_t offset = 0;
    for (int l = 0; l < arch_.num_layers(); ++l) {
        const std::size_t in = arch_.dims[l];
        const std::size_t out = arch_.dims[l + 1];
        weight_offsets_.push_back(offset);
        offset += in * out;
        bias_offsets_.push_back(offset);
        offset += out;
    }
}

MlpModel MlpModel::he_init(MlpArch arch, SeededRng& rng) {
    MlpModel model(std::move(arch));
    for (int l = 0; l < model.arch_.num_layers(); ++l) {
        const int in = model.arch_.dims[l];
        const int out = model.arch_.dims[l + 1];
        const double stddev = std::sqrt(2.0 / in);
        double* w = model.params_.data() + model.weight_offsets_[l];
        for (int i = 0; i < in * out; ++i) w[i] = stddev * rng.normal();
        // Biases stay zero.
    }
    return model;
}

WeightVector MlpModel::weights() const { return WeightVector(params_); }

void MlpModel::set_weights(const WeightVector& w) {
    if (w.size() != params_.size()) {
        throw ArchitectureMismatch("set_weights: got " + std::to_string(w.size()) +
                                   " parameters, model holds " +
                                   std::to_string(params_.size()));
    }
    params_ = w.values();
}

namespace {

// Reusable per-pass buffers: activations a[0..L], pre-activations z[0..L-1],
// and backpropagated deltas. Sized once per batch, reused across samples.
struct PassBuffers {
    std::vector<std::vector<double>> a;
    std::vector<std::vector<double>> z;
    std::vector<std::vector<double>> delta;

    explicit PassBuffers(const MlpArch& arch) {
        const int layers = arch.num_layers();
        a.resize(layers + 1);
        z.resize(layers);
        delta.resize(layers);
        for (int l = 0; l <= layers; ++l) a[l].assign(arch.dims[l], 0.0);
        for (int l = 0; l < layers; ++l) {
            z[l].assign(arch.dims[l + 1], 0.0);
            delta[l].assign(arch.dims[l + 1], 0.0);
        }
    }
};

void check_batch(const MlpArch& arch, const SyntheticDataset& data,
                 std::span<const int> idx) {
    if (idx.empty()) throw DimensionError("loss over an empty sample batch");
    if (data.dim != arch.dims.front() || data.num_classes != arch.dims.back()) {
        throw ArchitectureMismatch(
            "dataset shape (dim " + std::to_string(data.dim) + ", classes " +
            std::to_string(data.num_classes) + ") does not fit network " +
            std::to_string(arch.dims.front()) + " -> " + std::to_string(arch.dims.back()));
    }
}

// Forward one sample through the network; fills buf.a and buf.z and returns
// the cross-entropy loss for the given label via a stable log-sum-exp.
double forward_sample(const MlpArch& arch, const std::vector<double>& params,
                      const std::vector<std::size_t>& w_off,
                      const std::vector<std::size_t>& b_off,
                      std::span<const double> x, int label, PassBuffers& buf) {
    const int layers = arch.num_layers();
    std::copy(x.begin(), x.end(), buf.a[0].begin());
    for (int l = 0; l < layers; ++l) {
        const int in = arch.dims[l];
        const int out = arch.dims[l + 1];
        const double* w = params.data() + w_off[l];
        const double* b = params.data() + b_off[l];
        const std::vector<double>& prev = buf.a[l];
        for (int o = 0; o < out; ++o) {
            double acc = b[o];
            const double* row = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) acc += row[i] * prev[i];
            buf.z[l][o] = acc;
            buf.a[l + 1][o] = (l == layers - 1) ? acc : std::max(acc, 0.0);
        }
    }
    const std::vector<double>& logits = buf.z[layers - 1];
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    return -(logits[label] - m - std::log(sum));
}

}  // namespace

void MlpModel::logits(std::span<const double> x, std::vector<double>& out) const {
    if (static_cast<int>(x.size()) != arch_.dims.front()) {
        throw DimensionError("logits: input has " + std::to_string(x.size()) +
                             " features, network expects " +
                             std::to_string(arch_.dims.front()));
    }
    PassBuffers buf(arch_);
    forward_sample(arch_, params_, weight_offsets_, bias_offsets_, x, 0, buf);
    out = buf.z[arch_.num_layers() - 1];
}

int MlpModel::predict(std::span<const double> x) const {
    std::vector<double> z;
    logits(x, z);
    int best = 0;
    for (int k = 1; k < static_cast<int>(z.size()); ++k) {
        if (z[k] > z[best]) best = k;
    }
    return best;
}

double MlpModel::loss_and_gradient(const SyntheticDataset& data,
                                   std::span<const int> sample_indices,
                                   std::vector<double>& grad,
                                   long long* macs) const {
    check_batch(arch_, data, sample_indices);
    const int layers = arch_.num_layers();
    const std::size_t batch = sample_indices.size();
    grad.assign(params_.size(), 0.0);
    PassBuffers buf(arch_);

    double loss_sum = 0.0;
    for (int idx : sample_indices) {
        const int label = data.labels[idx];
        loss_sum += forward_sample(arch_, params_, weight_offsets_, bias_offsets_,
                                   data.row(idx), label, buf);

        // Output delta: softmax(logits) minus the one-hot label.
        buf.delta[layers - 1] = buf.z[layers - 1];
        softmax_inplace(buf.delta[layers - 1]);
        buf.delta[layers - 1][label] -= 1.0;

        for (int l = layers - 1; l >= 0; --l) {
            const int in = arch_.dims[l];
            const int out = arch_.dims[l + 1];
            const std::vector<double>& d = buf.delta[l];
            const std::vector<double>& prev = buf.a[l];
            double* gw = grad.data() + weight_offsets_[l];
            double* gb = grad.data() + bias_offsets_[l];
            for (int o = 0; o < out; ++o) {
                double* grow = gw + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) grow[i] += d[o] * prev[i];
                gb[o] += d[o];
            }
            if (l > 0) {
                // delta[l-1] = (W^T d) gated by ReLU'(z[l-1]).
                const double* w = params_.data() + weight_offsets_[l];
                std::vector<double>& dprev = buf.delta[l - 1];
                std::fill(dprev.begin(), dprev.end(), 0.0);
                for (int o = 0; o < out; ++o) {
                    const double* row = w + static_cast<std::size_t>(o) * in;
                    for (int i = 0; i < in; ++i) dprev[i] += row[i] * d[o];
                }
                for (int i = 0; i < in; ++i) {
                    if (buf.z[l - 1][i] <= 0.0) dprev[i] = 0.0;
                }
            }
        }
    }

    const double inv_b = 1.0 / static_cast<double>(batch);
    for (double& g : grad) g *= inv_b;
    if (macs != nullptr) {
        *macs += 3 * arch_.forward_macs_per_sample() * static_cast<long long>(batch);
    }
    return loss_sum * inv_b;
}

double MlpModel::loss(const SyntheticDataset& data,
                      std::span<const int> sample_indices,
                      long long* macs) const {
    check_batch(arch_, data, sample_indices);
    PassBuffers buf(arch_);
    double loss_sum = 0.0;
    for (int idx : sample_indices) {
        loss_sum += forward_sample(arch_, params_, weight_offsets_, bias_offsets_,
                                   data.row(idx), data.labels[idx], buf);
    }
    if (macs != nullptr) {
        *macs += arch_.forward_macs_per_sample() *
                 static_cast<long long>(sample_indices.size());
    }
    return loss_sum / static_cast<double>(sample_indices.size());
}

EvalResult evaluate(const MlpModel& model, const SyntheticDataset& data) {
    if (data.num_samples() == 0) throw DimensionError("evaluate over empty dataset");
    if (data.num_classes != model.arch().dims.back()) {
        throw ArchitectureMismatch("evaluate: dataset has " +
                                   std::to_string(data.num_classes) +
                                   " classes, network outputs " +
                                   std::to_string(model.arch().dims.back()));
    }

    // One forward pass per sample covers both loss and accuracy.
    EvalResult result;
    std::vector<double> z;
    double loss_sum = 0.0;
    int correct = 0;
    for (int i = 0; i < data.num_samples(); ++i) {
        model.logits(data.row(i), z);
        const double m = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - m);
        loss_sum += -(z[data.labels[i]] - m - std::log(sum));
        int best = 0;
        for (int k = 1; k < static_cast<int>(z.size()); ++k) {
            if (z[k] > z[best]) best = k;
        }
        if (best == data.labels[i]) ++correct;
    }
    result.loss = loss_sum / data.num_samples();
    result.accuracy = static_cast<double>(correct) / data.num_samples();
    result.macs = model.arch().forward_macs_per_sample() * data.num_samples();
    return result;
}

void AdamConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("Adam: learning_rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("Adam: beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam: beta2 must be in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("Adam: epsilon must be > 0");
}

AdamState::AdamState(std::size_t param_count)
    : m(param_count, 0.0), v(param_count, 0.0) {}

void AdamState::step(std::vector<double>& params,
                     const std::vector<double>& grad,
                     const AdamConfig& cfg) {
    cfg.validate();
    if (params.size() != m.size() || grad.size() != m.size()) {
        throw DimensionError("Adam step: parameter/gradient sizes do not match state");
    }
    t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

}  // namespace fedlab

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "sarcnn/cnn/adam.hpp"
#include "sarcnn/cnn/confusion.hpp"
#include "sarcnn/cnn/network.hpp"

namespace sarcnn::cnn {

struct TrainConfig {
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 30;
    std::uint64_t seed = 0;
    std::size_t validation_every = 1;  // epochs between validation passes; 0 disables
    bool keep_best_validation = true;

    void validate() const {
        require(learning_rate >= 0.0 && learning_rate < 1.0, "TrainConfig: learning rate must lie in [0, 1)");
        require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "TrainConfig: beta1 must lie in [0, 1)");
        require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "TrainConfig: beta2 must lie in [0, 1)");
        require(adam_epsilon > 0.0, "TrainConfig: Adam epsilon must be positive");
        require(batch_size >= 1, "TrainConfig: batch size must be at least 1");
    }

    AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_epsilon}; }
};

template <typename T>
struct LabeledTensors {
    std::vector<Tensor<T>> inputs;
    std::vector<std::size_t> labels;  // 1-based

    std::size_t size() const { return inputs.size(); }
    bool empty() const { return inputs.empty(); }
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;  // fraction, from the train-mode passes of the epoch
    double validation_accuracy = std::numeric_limits<double>::quiet_NaN();
};

template <typename T>
struct TrainResult {
    ModelParams<T> params;
    std::vector<EpochMetrics> history;
    std::size_t best_epoch = 0;
};

/// Replaces the running batch-norm statistics by the exact population statistics of the
/// convolution outputs over the given inputs.
template <typename T>
void finalize_running_statistics(ModelParams<T>& params, const std::vector<Tensor<T>>& inputs) {
    require(!inputs.empty(), "finalize_running_statistics: no inputs");
    const std::size_t channels = params.hyper.filters;
    std::vector<double> shift(channels, 0.0);
    if (params.has_running_stats)
        for (std::size_t k = 0; k < channels; ++k) shift[k] = params.bn_running_mean[k];
    std::vector<double> s1(channels, 0.0), s2(channels, 0.0);
    std::size_t count = 0;
    for (const auto& x : inputs) {
        const auto z = conv_forward(x, params);
        for (std::size_t k = 0; k < channels; ++k) {
            for (T v : z.plane(k)) {
                const double d = static_cast<double>(v) - shift[k];
                s1[k] += d;
                s2[k] += d * d;
            }
        }
        count += z.plane(0).size();
    }
    params.bn_running_mean.assign(channels, T{0});
    params.bn_running_var.assign(channels, T{0});
    for (std::size_t k = 0; k < channels; ++k) {
        const double mean = s1[k] / static_cast<double>(count);
        params.bn_running_mean[k] = static_cast<T>(shift[k] + mean);
        params.bn_running_var[k] = static_cast<T>(std::max(0.0, s2[k] / static_cast<double>(count) - mean * mean));
    }
    params.has_running_stats = true;
}

/// Inference-mode confusion matrix; ties in the argmax use a stream derived from seed.
template <typename T>
ConfusionMatrix evaluate(const ModelParams<T>& params, const LabeledTensors<T>& data, std::uint64_t seed = 0,
                         std::size_t chunk = 64) {
    const std::size_t classes = params.hyper.classes;
    for (std::size_t label : data.labels) require(label >= 1 && label <= classes, "evaluate: label out of range");
    ConfusionMatrix cm(classes);
    ModelParams<T> frozen = params;
    Rng tie_rng(derive_seed(seed, 0xe7a1));
    for (std::size_t start = 0; start < data.size(); start += chunk) {
        const std::size_t end = std::min(data.size(), start + chunk);
        std::span<const Tensor<T>> batch(data.inputs.data() + start, end - start);
        const auto cache = forward_batch<T>(batch, frozen, Mode::infer);
        for (std::size_t b = 0; b < batch.size(); ++b)
            cm.add(data.labels[start + b], classify<T>(cache.probs[b], tie_rng));
    }
    return cm;
}

/// Mini-batch Adam on the cross-entropy, starting from the given parameters.
/// With a non-empty validation set and keep_best_validation, the parameters of the epoch
/// with the highest validation accuracy are returned. Running statistics are finalised on
/// the training inputs at the end.
template <typename T>
TrainResult<T> train(ModelParams<T> params, const LabeledTensors<T>& train_set, const LabeledTensors<T>& validation,
                     const TrainConfig& config) {
    config.validate();
    params.hyper.validate();
    require(!train_set.empty(), "train: training split is empty");
    require(train_set.inputs.size() == train_set.labels.size(), "train: inputs and labels differ in length");

    auto state = AdamState<T>::zeros(params.hyper);
    Rng order_rng(derive_seed(config.seed, 0x5ff1e));
    Rng tie_rng(derive_seed(config.seed, 0x71e5));

    TrainResult<T> result;
    std::optional<ModelParams<T>> best;
    double best_accuracy = -1.0;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Tensor<T>> batch_inputs;
    std::vector<std::size_t> batch_labels;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle(order, order_rng);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch_inputs.clear();
            batch_labels.clear();
            for (std::size_t idx = start; idx < end; ++idx) {
                batch_inputs.push_back(train_set.inputs[order[idx]]);
                batch_labels.push_back(train_set.labels[order[idx]]);
            }
            const auto cache = forward_batch<T>(batch_inputs, params, Mode::train);
            loss_sum += cross_entropy<T>(cache.probs, batch_labels) * static_cast<double>(batch_inputs.size());
            for (std::size_t b = 0; b < batch_inputs.size(); ++b)
                if (classify<T>(cache.probs[b], tie_rng) == batch_labels[b]) ++correct;
            const auto grads = backward_batch<T>(cache, params, batch_labels);
            adam_step(params.theta, grads, state, config.adam());
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.train_loss = loss_sum / static_cast<double>(order.size());
        m.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
        const bool validate_now = !validation.empty() && config.validation_every > 0 &&
                                  (epoch % config.validation_every == 0 || epoch == config.max_epochs);
        if (validate_now) {
            m.validation_accuracy = evaluate(params, validation, derive_seed(config.seed, epoch)).accuracy();
            if (m.validation_accuracy > best_accuracy) {
                best_accuracy = m.validation_accuracy;
                best = params;
                result.best_epoch = epoch;
            }
        }
        result.history.push_back(m);
    }

    if (config.keep_best_validation && best) {
        params = std::move(*best);
    } else {
        result.best_epoch = config.max_epochs;
    }
    finalize_running_statistics(params, train_set.inputs);
    result.params = std::move(params);
    return result;
}

template <typename T>
TrainResult<T> train(const Hyper& hyper, const LabeledTensors<T>& train_set, const LabeledTensors<T>& validation,
                     const TrainConfig& config) {
    return train(init_params<T>(hyper, config.seed), train_set, validation, config);
}

}  // namespace sarcnn::cnn

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sarcnn/cnn/params.hpp"
#include "sarcnn/cnn/tensor.hpp"
#include "sarcnn/random.hpp"

namespace sarcnn::cnn {

enum class Mode { train, infer };

/// Valid (unpadded, stride 1) convolution of a single-channel input with K filters.
template <typename T>
Tensor<T> conv_forward(const Tensor<T>& input, const ModelParams<T>& params) {
    const Hyper& h = params.hyper;
    require(input.channels() == 1, "conv_forward: input must have one channel");
    require(input.height() == h.input_size && input.width() == h.input_size,
            "conv_forward: input size does not match the model");
    const std::size_t kf = h.filter_size;
    const std::size_t m_out = h.conv_size();
    const std::size_t p_in = h.input_size;
    const T* src = input.values().data();

    Tensor<T> out(m_out, m_out, h.filters);
    for (std::size_t k = 0; k < h.filters; ++k) {
        auto plane = out.plane(k);
        std::fill(plane.begin(), plane.end(), params.theta.conv_bias[k]);
        T* dst = plane.data();
        for (std::size_t m = 0; m < kf; ++m) {
            for (std::size_t n = 0; n < kf; ++n) {
                const T w = params.theta.conv_weights[(k * kf + m) * kf + n];
                for (std::size_t i = 0; i < m_out; ++i) {
                    const T* row = src + (i + m) * p_in + n;
                    T* out_row = dst + i * m_out;
                    for (std::size_t j = 0; j < m_out; ++j) out_row[j] += w * row[j];
                }
            }
        }
    }
    return out;
}

/// Per-channel normalisation statistics actually applied in a batch-norm pass.
template <typename T>
struct BatchNormStats {
    std::vector<T> mean;
    std::vector<T> var;
    std::vector<T> inv_std;
};

/// Train mode: biased mean/variance over the batch and spatial extent of each channel.
/// Infer mode: the running statistics.
template <typename T>
BatchNormStats<T> batchnorm_statistics(std::span<const Tensor<T>> batch, const ModelParams<T>& params, Mode mode) {
    const std::size_t channels = params.hyper.filters;
    BatchNormStats<T> s{std::vector<T>(channels), std::vector<T>(channels), std::vector<T>(channels)};
    if (mode == Mode::infer) {
        if (!params.has_running_stats) fail(ErrorCode::state, "batchnorm: no running statistics; train the model first");
        s.mean = params.bn_running_mean;
        s.var = params.bn_running_var;
    } else {
        require(!batch.empty(), "batchnorm: empty batch");
        for (std::size_t k = 0; k < channels; ++k) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& x : batch) {
                for (T v : x.plane(k)) sum += v;
                count += x.plane(k).size();
            }
            const double mean = sum / static_cast<double>(count);
            double sq = 0.0;
            for (const auto& x : batch) {
                for (T v : x.plane(k)) sq += (v - mean) * (v - mean);
            }
            s.mean[k] = static_cast<T>(mean);
            s.var[k] = static_cast<T>(sq / static_cast<double>(count));
        }
    }
    const double eps = params.hyper.bn_epsilon;
    for (std::size_t k = 0; k < channels; ++k)
        s.inv_std[k] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(s.var[k]) + eps));
    return s;
}

/// Folds batch statistics into the running statistics (momentum 0.9); the first batch
/// initialises them.
template <typename T>
void update_running_statistics(ModelParams<T>& params, const BatchNormStats<T>& stats, double momentum = 0.9) {
    if (!params.has_running_stats) {
        params.bn_running_mean = stats.mean;
        params.bn_running_var = stats.var;
        params.has_running_stats = true;
        return;
    }
    for (std::size_t k = 0; k < stats.mean.size(); ++k) {
        params.bn_running_mean[k] = static_cast<T>(momentum * params.bn_running_mean[k] + (1.0 - momentum) * stats.mean[k]);
        params.bn_running_var[k] = static_cast<T>(momentum * params.bn_running_var[k] + (1.0 - momentum) * stats.var[k]);
    }
}

template <typename T>
Tensor<T> batchnorm_apply(const Tensor<T>& x, const ModelParams<T>& params, const BatchNormStats<T>& stats) {
    Tensor<T> out = x;
    for (std::size_t k = 0; k < x.channels(); ++k) {
        const T scale = params.theta.bn_scale[k] * stats.inv_std[k];
        const T offset = params.theta.bn_offset[k];
        const T mean = stats.mean[k];
        for (T& v : out.plane(k)) v = scale * (v - mean) + offset;
    }
    return out;
}

/// Batch normalisation of a mini-batch; train mode also updates the running statistics.
template <typename T>
std::vector<Tensor<T>> batchnorm_forward(std::span<const Tensor<T>> batch, ModelParams<T>& params, Mode mode) {
    const auto stats = batchnorm_statistics(batch, params, mode);
    if (mode == Mode::train) update_running_statistics(params, stats);
    std::vector<Tensor<T>> out;
    out.reserve(batch.size());
    for (const auto& x : batch) out.push_back(batchnorm_apply(x, params, stats));
    return out;
}

template <typename T>
Tensor<T> relu(Tensor<T> x) {
    for (T& v : x.values()) v = std::max(v, T{0});
    return x;
}

/// 2x2 stride-2 max pooling. If argmax is given it receives, per output element, the
/// plane offset (i * width + j) of the first maximal input in row-major block order.
template <typename T>
Tensor<T> maxpool(const Tensor<T>& x, std::vector<std::uint32_t>* argmax = nullptr) {
    require(x.height() % 2 == 0 && x.width() % 2 == 0, "maxpool: input size must be even");
    const std::size_t ho = x.height() / 2;
    const std::size_t wo = x.width() / 2;
    Tensor<T> out(ho, wo, x.channels());
    if (argmax) argmax->assign(out.size(), 0);
    for (std::size_t k = 0; k < x.channels(); ++k) {
        const T* in = x.plane(k).data();
        T* dst = out.plane(k).data();
        for (std::size_t i = 0; i < ho; ++i) {
            for (std::size_t j = 0; j < wo; ++j) {
                std::size_t best = (2 * i) * x.width() + 2 * j;
                for (std::size_t m = 0; m < 2; ++m) {
                    for (std::size_t n = 0; n < 2; ++n) {
                        const std::size_t idx = (2 * i + m) * x.width() + 2 * j + n;
                        if (in[idx] > in[best]) best = idx;
                    }
                }
                dst[i * wo + j] = in[best];
                if (argmax) (*argmax)[(k * ho + i) * wo + j] = static_cast<std::uint32_t>(best);
            }
        }
    }
    return out;
}

/// Flattens in row-major order by height, then width, then channel.
template <typename T>
std::vector<T> flatten(const Tensor<T>& x) {
    std::vector<T> out(x.size());
    const std::size_t kc = x.channels();
    for (std::size_t k = 0; k < kc; ++k) {
        for (std::size_t i = 0; i < x.height(); ++i) {
            for (std::size_t j = 0; j < x.width(); ++j) out[(i * x.width() + j) * kc + k] = x(i, j, k);
        }
    }
    return out;
}

/// W * features + b for features already flattened in fc order.
template <typename T>
std::vector<T> fc_apply(std::span<const T> features, const ModelParams<T>& params) {
    const Hyper& h = params.hyper;
    require(features.size() == h.features(), "fc: feature length does not match the model");
    std::vector<T> out(h.classes);
    for (std::size_t o = 0; o < h.classes; ++o) {
        const T* w = params.theta.fc_weights.data() + o * features.size();
        T acc = params.theta.fc_bias[o];
        for (std::size_t f = 0; f < features.size(); ++f) acc += w[f] * features[f];
        out[o] = acc;
    }
    return out;
}

template <typename T>
std::vector<T> fc_forward(const Tensor<T>& x, const ModelParams<T>& params) {
    const Hyper& h = params.hyper;
    require(x.height() == h.pooled_size() && x.width() == h.pooled_size() && x.channels() == h.filters,
            "fc_forward: input shape does not match the model");
    const auto flat = flatten(x);
    return fc_apply<T>(flat, params);
}

template <typename T>
std::vector<T> softmax(std::span<const T> logits) {
    require(!logits.empty(), "softmax: empty input");
    const T top = *std::max_element(logits.begin(), logits.end());
    std::vector<T> out(logits.size());
    T total = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - top);
        total += out[i];
    }
    for (T& v : out) v /= total;
    return out;
}

/// 1-based index of the largest probability; ties resolved uniformly with rng.
template <typename T>
std::size_t classify(std::span<const T> probs, Rng& rng) {
    require(!probs.empty(), "classify: empty input");
    const T top = *std::max_element(probs.begin(), probs.end());
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < probs.size(); ++i)
        if (probs[i] == top) tied.push_back(i);
    const std::size_t pick = tied.size() == 1 ? tied.front() : tied[uniform_index(rng, tied.size())];
    return pick + 1;
}

inline constexpr double log_floor = 1e-12;

/// Mean negative log-likelihood of the true (1-based) labels.
template <typename T>
double cross_entropy(std::span<const std::vector<T>> probs, std::span<const std::size_t> labels) {
    require(probs.size() == labels.size(), "cross_entropy: batch size mismatch");
    require(!probs.empty(), "cross_entropy: empty batch");
    double total = 0.0;
    for (std::size_t b = 0; b < probs.size(); ++b) {
        require(labels[b] >= 1 && labels[b] <= probs[b].size(), "cross_entropy: label out of range");
        total -= std::log(std::max(static_cast<double>(probs[b][labels[b] - 1]), log_floor));
    }
    return total / static_cast<double>(probs.size());
}

}  // namespace sarcnn::cnn

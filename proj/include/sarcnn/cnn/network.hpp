#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sarcnn/cnn/layers.hpp"
#include "sarcnn/parallel.hpp"

namespace sarcnn::cnn {

/// Activations kept from a batched forward pass for the backward pass.
template <typename T>
struct BatchCache {
    std::span<const Tensor<T>> inputs;
    Mode mode = Mode::train;
    std::vector<Tensor<T>> conv;                      // convolution outputs
    BatchNormStats<T> stats;                          // statistics applied by batch-norm
    std::vector<std::vector<std::uint32_t>> argmax;   // max-pool routing
    std::vector<std::vector<T>> features;             // flattened pooled outputs
    std::vector<std::vector<T>> probs;                // softmax outputs
};

/// Convolution through softmax over a mini-batch. Train mode normalises with batch statistics and folds them
/// into the running statistics.
template <typename T>
BatchCache<T> forward_batch(std::span<const Tensor<T>> inputs, ModelParams<T>& params, Mode mode) {
    require(!inputs.empty(), "forward: empty batch");
    const std::size_t batch = inputs.size();
    BatchCache<T> c;
    c.inputs = inputs;
    c.mode = mode;
    c.conv.resize(batch);
    c.argmax.resize(batch);
    c.features.resize(batch);
    c.probs.resize(batch);

    parallel_for(batch, [&](std::size_t b) { c.conv[b] = conv_forward(inputs[b], params); });
    c.stats = batchnorm_statistics<T>(c.conv, params, mode);
    if (mode == Mode::train) update_running_statistics(params, c.stats);

    const ModelParams<T>& frozen = params;
    parallel_for(batch, [&](std::size_t b) {
        const auto pooled = maxpool(relu(batchnorm_apply(c.conv[b], frozen, c.stats)), &c.argmax[b]);
        c.features[b] = flatten(pooled);
        const auto logits = fc_apply<T>(c.features[b], frozen);
        c.probs[b] = softmax<T>(logits);
    });
    return c;
}

/// Inference-mode class probabilities for a single input.
template <typename T>
std::vector<T> predict(const Tensor<T>& input, const ModelParams<T>& params) {
    ModelParams<T> copy = params;
    auto cache = forward_batch<T>(std::span<const Tensor<T>>(&input, 1), copy, Mode::infer);
    return std::move(cache.probs.front());
}

/// Reverse-mode gradients of the batch cross-entropy with respect to every learnable
/// parameter, given the cache of the matching forward pass.
template <typename T>
Parameters<T> backward_batch(const BatchCache<T>& c, const ModelParams<T>& params,
                             std::span<const std::size_t> labels) {
    const Hyper& h = params.hyper;
    const std::size_t batch = c.inputs.size();
    require(labels.size() == batch, "backward: label count does not match the batch");
    for (std::size_t label : labels) require(label >= 1 && label <= h.classes, "backward: label out of range");

    const std::size_t kf = h.filter_size;
    const std::size_t m_out = h.conv_size();
    const std::size_t pooled = h.pooled_size();
    const std::size_t channels = h.filters;
    const std::size_t features = h.features();
    const std::size_t p_in = h.input_size;
    const T inv_batch = T{1} / static_cast<T>(batch);

    Parameters<T> g = Parameters<T>::zeros(h);

    // Softmax and fully connected: dL/dlogits = (p - y) / N, accumulated in sample order.
    std::vector<std::vector<T>> dlogits(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        auto& d = dlogits[b];
        d = c.probs[b];
        d[labels[b] - 1] -= T{1};
        for (T& v : d) v *= inv_batch;
        for (std::size_t o = 0; o < h.classes; ++o) {
            g.fc_bias[o] += d[o];
            T* row = g.fc_weights.data() + o * features;
            const T* x = c.features[b].data();
            for (std::size_t f = 0; f < features; ++f) row[f] += d[o] * x[f];
        }
    }

    // Route feature gradients to the pooled argmax when the ReLU was active.
    std::vector<Tensor<T>> dz(batch);
    parallel_for(batch, [&](std::size_t b) {
        std::vector<T> dfeat(features, T{0});
        for (std::size_t o = 0; o < h.classes; ++o) {
            const T d = dlogits[b][o];
            const T* row = params.theta.fc_weights.data() + o * features;
            for (std::size_t f = 0; f < features; ++f) dfeat[f] += d * row[f];
        }
        Tensor<T> dy(m_out, m_out, channels);
        for (std::size_t k = 0; k < channels; ++k) {
            const T scale = params.theta.bn_scale[k] * c.stats.inv_std[k];
            const T offset = params.theta.bn_offset[k];
            const T mean = c.stats.mean[k];
            const T* z = c.conv[b].plane(k).data();
            T* dst = dy.plane(k).data();
            for (std::size_t i = 0; i < pooled; ++i) {
                for (std::size_t j = 0; j < pooled; ++j) {
                    const std::uint32_t pos = c.argmax[b][(k * pooled + i) * pooled + j];
                    const T y = scale * (z[pos] - mean) + offset;
                    if (y > T{0}) dst[pos] = dfeat[(i * pooled + j) * channels + k];
                }
            }
        }
        dz[b] = std::move(dy);
    });

    // Batch-norm backward. Channel sums are reduced in sample order.
    std::vector<T> sum_dy(channels, T{0});
    std::vector<T> sum_dy_xhat(channels, T{0});
    {
        std::vector<std::vector<double>> partial(batch, std::vector<double>(2 * channels, 0.0));
        parallel_for(batch, [&](std::size_t b) {
            for (std::size_t k = 0; k < channels; ++k) {
                const T* z = c.conv[b].plane(k).data();
                const T* dy = dz[b].plane(k).data();
                double s1 = 0.0, s2 = 0.0;
                for (std::size_t e = 0; e < m_out * m_out; ++e) {
                    s1 += dy[e];
                    s2 += dy[e] * (z[e] - c.stats.mean[k]) * c.stats.inv_std[k];
                }
                partial[b][k] = s1;
                partial[b][channels + k] = s2;
            }
        });
        for (std::size_t k = 0; k < channels; ++k) {
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t b = 0; b < batch; ++b) {
                s1 += partial[b][k];
                s2 += partial[b][channels + k];
            }
            sum_dy[k] = static_cast<T>(s1);
            sum_dy_xhat[k] = static_cast<T>(s2);
        }
    }
    for (std::size_t k = 0; k < channels; ++k) {
        g.bn_offset[k] = sum_dy[k];
        g.bn_scale[k] = sum_dy_xhat[k];
    }

    const T count = static_cast<T>(batch * m_out * m_out);
    std::vector<std::vector<T>> conv_partial(batch, std::vector<T>(channels * kf * kf + channels, T{0}));
    parallel_for(batch, [&](std::size_t b) {
        const T* x = c.inputs[b].values().data();
        auto& part = conv_partial[b];
        for (std::size_t k = 0; k < channels; ++k) {
            const T gamma_inv_std = params.theta.bn_scale[k] * c.stats.inv_std[k];
            const T mean = c.stats.mean[k];
            const T inv_std = c.stats.inv_std[k];
            T* d = dz[b].plane(k).data();
            // dz = gamma * inv_std * (dy - sum(dy)/N - xhat * sum(dy * xhat)/N) in train mode.
            if (c.mode == Mode::train) {
                const T mean_dy = sum_dy[k] / count;
                const T mean_dy_xhat = sum_dy_xhat[k] / count;
                for (std::size_t e = 0; e < m_out * m_out; ++e) {
                    const T xhat = (c.conv[b].plane(k)[e] - mean) * inv_std;
                    d[e] = gamma_inv_std * (d[e] - mean_dy - xhat * mean_dy_xhat);
                }
            } else {
                for (std::size_t e = 0; e < m_out * m_out; ++e) d[e] *= gamma_inv_std;
            }

            // Convolution: dW[k, m, n] = sum_ij dz[k, i, j] * x[i + m, j + n].
            T bias = 0;
            for (std::size_t e = 0; e < m_out * m_out; ++e) bias += d[e];
            part[channels * kf * kf + k] = bias;
            for (std::size_t m = 0; m < kf; ++m) {
                for (std::size_t n = 0; n < kf; ++n) {
                    T acc = 0;
                    for (std::size_t i = 0; i < m_out; ++i) {
                        const T* xr = x + (i + m) * p_in + n;
                        const T* gr = d + i * m_out;
#pragma omp simd reduction(+ : acc)
                        for (std::size_t j = 0; j < m_out; ++j) acc += gr[j] * xr[j];
                    }
                    part[(k * kf + m) * kf + n] = acc;
                }
            }
        }
    });
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t e = 0; e < channels * kf * kf; ++e) g.conv_weights[e] += conv_partial[b][e];
        for (std::size_t k = 0; k < channels; ++k) g.conv_bias[k] += conv_partial[b][channels * kf * kf + k];
    }
    return g;
}

}  // namespace sarcnn::cnn

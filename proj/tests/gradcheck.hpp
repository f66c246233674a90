#pragma once

// Central finite-difference check of the analytic batch gradients.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sarcnn/cnn/network.hpp"
#include "sarcnn/random.hpp"

namespace gradcheck {

using namespace sarcnn;
using namespace sarcnn::cnn;

struct Problem {
    ModelParams<double> params;
    std::vector<Tensor<double>> inputs;
    std::vector<std::size_t> labels;
};

/// The small network used for gradient checks: P=20, K_f=5, K=2, O=3, batch of 4.
inline Problem tiny_problem(std::uint64_t seed) {
    Hyper h;
    h.input_size = 20;
    h.filter_size = 5;
    h.filters = 2;
    h.classes = 3;
    Problem p{init_params<double>(h, seed), {}, {}};
    Rng rng(derive_seed(seed, 99));
    // Non-trivial scale and offset so every parameter group carries signal.
    for (auto& v : p.params.theta.bn_scale) v = uniform(rng, 0.5, 1.5);
    for (auto& v : p.params.theta.bn_offset) v = uniform(rng, -0.5, 0.5);
    for (auto& v : p.params.theta.conv_bias) v = uniform(rng, -0.5, 0.5);
    for (auto& v : p.params.theta.fc_bias) v = uniform(rng, -0.5, 0.5);
    for (int b = 0; b < 4; ++b) {
        Tensor<double> x(20, 20, 1);
        for (auto& v : x.values()) v = uniform(rng, 0.0, 1.0);
        p.inputs.push_back(std::move(x));
        p.labels.push_back(static_cast<std::size_t>(b % 3) + 1);
    }
    return p;
}

inline double loss(const Problem& p, const ModelParams<double>& params) {
    ModelParams<double> copy = params;
    const auto cache = forward_batch<double>(p.inputs, copy, Mode::train);
    return cross_entropy<double>(cache.probs, p.labels);
}

struct Entry {
    std::string group;
    std::size_t index;
    double analytic;
    double numeric;
};

inline std::vector<Entry> compare(const Problem& p, double step = 1e-3) {
    ModelParams<double> params = p.params;
    const auto cache = forward_batch<double>(p.inputs, params, Mode::train);
    const auto grads = backward_batch<double>(cache, p.params, p.labels);
    std::vector<Entry> out;
    static const char* names[] = {"conv_weights", "conv_bias", "bn_scale", "bn_offset", "fc_weights", "fc_bias"};
    const auto analytic = grads.groups();
    for (std::size_t g = 0; g < 6; ++g) {
        for (std::size_t i = 0; i < analytic[g]->size(); ++i) {
            ModelParams<double> plus = p.params, minus = p.params;
            (*plus.theta.groups()[g])[i] += step;
            (*minus.theta.groups()[g])[i] -= step;
            const double numeric = (loss(p, plus) - loss(p, minus)) / (2.0 * step);
            out.push_back({names[g], i, (*analytic[g])[i], numeric});
        }
    }
    return out;
}

/// |a - n| / max(|a|, |n|, floor); the floor keeps entries that vanish analytically (such as
/// conv biases, which batch normalisation cancels) from dividing rounding noise by zero.
inline double relative_error(const Entry& e, double floor) {
    return std::abs(e.analytic - e.numeric) / std::max({std::abs(e.analytic), std::abs(e.numeric), floor});
}

}  // namespace gradcheck

#pragma once

#include <cmath>
#include <cstdint>

#include "sarcnn/cnn/params.hpp"

namespace sarcnn::cnn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
    Parameters<T> first_moment;
    Parameters<T> second_moment;
    std::uint64_t step = 0;

    static AdamState zeros(const Hyper& h) { return {Parameters<T>::zeros(h), Parameters<T>::zeros(h), 0}; }
};

/// One bias-corrected Adam update of every learnable group.
template <typename T>
void adam_step(Parameters<T>& theta, const Parameters<T>& grads, AdamState<T>& state, const AdamConfig& cfg) {
    ++state.step;
    const double correct1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double correct2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    auto params = theta.groups();
    const auto g = grads.groups();
    auto m = state.first_moment.groups();
    auto v = state.second_moment.groups();
    for (std::size_t group = 0; group < params.size(); ++group) {
        auto& p = *params[group];
        const auto& gr = *g[group];
        auto& mg = *m[group];
        auto& vg = *v[group];
        require(gr.size() == p.size() && mg.size() == p.size() && vg.size() == p.size(),
                "adam_step: gradient shape does not match parameters");
        for (std::size_t e = 0; e < p.size(); ++e) {
            const double grad = gr[e];
            const double m_new = cfg.beta1 * mg[e] + (1.0 - cfg.beta1) * grad;
            const double v_new = cfg.beta2 * vg[e] + (1.0 - cfg.beta2) * grad * grad;
            mg[e] = static_cast<T>(m_new);
            vg[e] = static_cast<T>(v_new);
            const double m_hat = m_new / correct1;
            const double v_hat = v_new / correct2;
            p[e] = static_cast<T>(p[e] - cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
        }
    }
}

}  // namespace sarcnn::cnn

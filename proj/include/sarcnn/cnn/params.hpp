#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include "sarcnn/error.hpp"
#include "sarcnn/random.hpp"

namespace sarcnn::cnn {

/// Architecture of the seven-layer classifier.
struct Hyper {
    std::size_t input_size = 100;  // P
    std::size_t filter_size = 13;  // K_f
    std::size_t filters = 1;       // K
    std::size_t classes = 4;       // O
    double bn_epsilon = std::numeric_limits<double>::epsilon();

    std::size_t conv_size() const { return input_size - filter_size + 1; }  // M
    std::size_t pooled_size() const { return conv_size() / 2; }
    std::size_t features() const { return pooled_size() * pooled_size() * filters; }

    void validate() const {
        require(filter_size >= 1, "Hyper: filter size must be positive");
        require(input_size >= filter_size, "Hyper: input smaller than the filter");
        require(conv_size() % 2 == 0, "Hyper: convolution output size must be even for 2x2 pooling");
        require(filters >= 1, "Hyper: need at least one filter");
        require(classes >= 1, "Hyper: need at least one class");
        require(bn_epsilon > 0.0, "Hyper: batch-norm epsilon must be positive");
    }

    friend bool operator==(const Hyper&, const Hyper&) = default;
};

/// Learnable parameter set; also used for gradients and optimizer moments.
template <typename T>
struct Parameters {
    std::vector<T> conv_weights;  // K x K_f x K_f
    std::vector<T> conv_bias;     // K
    std::vector<T> bn_scale;      // K
    std::vector<T> bn_offset;     // K
    std::vector<T> fc_weights;    // O x features, row-major
    std::vector<T> fc_bias;       // O

    static Parameters zeros(const Hyper& h) {
        const std::size_t kf2 = h.filter_size * h.filter_size;
        return {std::vector<T>(h.filters * kf2), std::vector<T>(h.filters), std::vector<T>(h.filters),
                std::vector<T>(h.filters),       std::vector<T>(h.classes * h.features()),
                std::vector<T>(h.classes)};
    }

    /// Calls fn(name, tensor) for every group in a fixed order.
    template <typename Fn>
    void for_each(Fn&& fn) {
        visit(*this, fn);
    }
    template <typename Fn>
    void for_each(Fn&& fn) const {
        visit(*this, fn);
    }

    std::array<std::vector<T>*, 6> groups() {
        return {&conv_weights, &conv_bias, &bn_scale, &bn_offset, &fc_weights, &fc_bias};
    }
    std::array<const std::vector<T>*, 6> groups() const {
        return {&conv_weights, &conv_bias, &bn_scale, &bn_offset, &fc_weights, &fc_bias};
    }

    friend bool operator==(const Parameters&, const Parameters&) = default;

private:
    template <typename Self, typename Fn>
    static void visit(Self& self, Fn& fn) {
        fn(std::string_view{"conv_weights"}, self.conv_weights);
        fn(std::string_view{"conv_bias"}, self.conv_bias);
        fn(std::string_view{"bn_scale"}, self.bn_scale);
        fn(std::string_view{"bn_offset"}, self.bn_offset);
        fn(std::string_view{"fc_weights"}, self.fc_weights);
        fn(std::string_view{"fc_bias"}, self.fc_bias);
    }
};

template <typename T>
struct ModelParams {
    Hyper hyper;
    Parameters<T> theta;
    std::vector<T> bn_running_mean;  // K
    std::vector<T> bn_running_var;   // K
    bool has_running_stats = false;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Fan-in scaled uniform weights, unit batch-norm scale, zero offsets and biases.
template <typename T>
ModelParams<T> init_params(const Hyper& hyper, std::uint64_t seed) {
    hyper.validate();
    ModelParams<T> p{hyper, Parameters<T>::zeros(hyper), std::vector<T>(hyper.filters, T{0}),
                     std::vector<T>(hyper.filters, T{1}), false};
    Rng rng(derive_seed(seed, 0x1417));
    const double conv_bound = 1.0 / static_cast<double>(hyper.filter_size);
    for (T& w : p.theta.conv_weights) w = static_cast<T>(uniform(rng, -conv_bound, conv_bound));
    const double fc_bound = 1.0 / std::sqrt(static_cast<double>(hyper.features()));
    for (T& w : p.theta.fc_weights) w = static_cast<T>(uniform(rng, -fc_bound, fc_bound));
    std::fill(p.theta.bn_scale.begin(), p.theta.bn_scale.end(), T{1});
    return p;
}

}  // namespace sarcnn::cnn

#pragma once

#include <cstddef>
#include <vector>

#include "sarcnn/error.hpp"

namespace sarcnn::cnn {

/// Rows are actual classes, columns predicted classes; labels are 1-based.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {}

    std::size_t classes() const noexcept { return classes_; }

    void add(std::size_t actual, std::size_t predicted) {
        require(actual >= 1 && actual <= classes_, "confusion matrix: actual label out of range");
        require(predicted >= 1 && predicted <= classes_, "confusion matrix: predicted label out of range");
        ++counts_[(actual - 1) * classes_ + (predicted - 1)];
    }

    std::size_t at(std::size_t actual, std::size_t predicted) const {
        return counts_[(actual - 1) * classes_ + (predicted - 1)];
    }

    std::size_t total() const {
        std::size_t s = 0;
        for (std::size_t c : counts_) s += c;
        return s;
    }

    std::size_t trace() const {
        std::size_t s = 0;
        for (std::size_t i = 0; i < classes_; ++i) s += counts_[i * classes_ + i];
        return s;
    }

    /// Fraction correct; 0 for an empty matrix.
    double accuracy() const {
        const std::size_t n = total();
        return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t classes_ = 0;
    std::vector<std::size_t> counts_;
};

}  // namespace sarcnn::cnn

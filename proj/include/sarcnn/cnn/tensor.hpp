#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sarcnn/error.hpp"
#include "sarcnn/matrix.hpp"

namespace sarcnn::cnn {

/// height x width x channels tensor stored channel-planar: element (i, j, k) lives at
/// (k * height + i) * width + j.
template <typename T>
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t height, std::size_t width, std::size_t channels, T fill = T{})
        : height_(height), width_(width), channels_(channels), data_(height * width * channels, fill) {}

    static Tensor from_matrix(const Matrix<T>& m) {
        Tensor t(m.rows(), m.cols(), 1);
        std::copy(m.values().begin(), m.values().end(), t.data_.begin());
        return t;
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept {
        return data_[(k * height_ + i) * width_ + j];
    }
    const T& operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return data_[(k * height_ + i) * width_ + j];
    }

    /// Contiguous height x width plane of channel k.
    std::span<T> plane(std::size_t k) noexcept { return {data_.data() + k * height_ * width_, height_ * width_}; }
    std::span<const T> plane(std::size_t k) const noexcept {
        return {data_.data() + k * height_ * width_, height_ * width_};
    }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 0;
    std::vector<T> data_;
};

}  // namespace sarcnn::cnn

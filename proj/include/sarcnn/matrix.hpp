#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "sarcnn/error.hpp"

namespace sarcnn {

/// Dense row-major matrix.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }

    T min() const { return *std::min_element(data_.begin(), data_.end()); }
    T max() const { return *std::max_element(data_.begin(), data_.end()); }

    template <typename U>
    Matrix<U> cast() const {
        Matrix<U> out(rows_, cols_);
        std::transform(data_.begin(), data_.end(), out.data(),
                       [](T v) { return static_cast<U>(v); });
        return out;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// Affine rescale so that min maps to 0 and max to 1; a constant matrix maps to zeros.
template <typename T>
void rescale_unit(Matrix<T>& m) {
    if (m.empty()) return;
    const T lo = m.min();
    const T hi = m.max();
    if (!(hi > lo)) {
        std::fill(m.values().begin(), m.values().end(), T{0});
        return;
    }
    const T span = hi - lo;
    for (T& v : m.values()) v = (v - lo) / span;
}

}  // namespace sarcnn

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "memotion/core/error.hpp"

namespace memotion {

// Row-major throughout; a batch of feature vectors is an N x D matrix whose
// rows are samples.
using Mat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IMat = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXf;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

// Dense row-major float tensor. Rank is dynamic; conv layers use NCHW.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        data_.assign(static_cast<size_t>(count(shape_)), 0.0f);
    }

    Tensor(std::initializer_list<int> shape) : Tensor(std::vector<int>(shape)) {}

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }

    int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }

    int64_t size() const { return static_cast<int64_t>(data_.size()); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    float operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    void fill(float v) { std::fill(data_.begin(), data_.end(), v); }
    void set_zero() { fill(0.0f); }

    // 2-D Eigen view; rows*cols must cover the whole buffer.
    MatMap mat(int rows, int cols) {
        check(static_cast<int64_t>(rows) * cols == size(), "Tensor::mat: size mismatch");
        return MatMap(data_.data(), rows, cols);
    }
    ConstMatMap mat(int rows, int cols) const {
        check(static_cast<int64_t>(rows) * cols == size(), "Tensor::mat: size mismatch");
        return ConstMatMap(data_.data(), rows, cols);
    }

    // View of an NCHW tensor's sample n as (C) x (H*W).
    MatMap sample_mat(int n) {
        check(rank() == 4, "Tensor::sample_mat: rank must be 4");
        int chw = dim(1) * dim(2) * dim(3);
        return MatMap(data_.data() + static_cast<int64_t>(n) * chw, dim(1), dim(2) * dim(3));
    }
    ConstMatMap sample_mat(int n) const {
        check(rank() == 4, "Tensor::sample_mat: rank must be 4");
        int chw = dim(1) * dim(2) * dim(3);
        return ConstMatMap(data_.data() + static_cast<int64_t>(n) * chw, dim(1), dim(2) * dim(3));
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    static int64_t count(const std::vector<int>& shape) {
        int64_t n = 1;
        for (int d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

private:
    std::vector<int> shape_;
    std::vector<float> data_;
};

inline bool all_finite(const Tensor& t) {
    for (int64_t i = 0; i < t.size(); ++i)
        if (!std::isfinite(t[i])) return false;
    return true;
}

inline bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace memotion

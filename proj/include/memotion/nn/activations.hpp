#pragma once

#include "memotion/core/tensor.hpp"

namespace memotion::nn {

// ReLU over whole tensors, caching the output sign pattern.
class TensorRelu {
public:
    Tensor forward(const Tensor& x) {
        y_ = x;
        for (int64_t i = 0; i < y_.size(); ++i)
            if (y_[i] < 0.0f) y_[i] = 0.0f;
        return y_;
    }

    Tensor backward(const Tensor& dy) {
        Tensor dx(dy.shape());
        for (int64_t i = 0; i < dy.size(); ++i) dx[i] = y_[i] > 0.0f ? dy[i] : 0.0f;
        return dx;
    }

private:
    Tensor y_;
};

inline void tensor_add_inplace(Tensor& a, const Tensor& b) {
    check(a.same_shape(b), "tensor_add_inplace: shape mismatch");
    for (int64_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

}  // namespace memotion::nn

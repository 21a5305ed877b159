#pragma once

#include <string>

#include "memotion/core/tensor.hpp"
#include "memotion/nn/dense.hpp"
#include "memotion/nn/module.hpp"

namespace memotion::nn {

// Squeeze-and-excitation channel gate: global average pool per channel,
// bottleneck MLP, sigmoid gate in [0,1] scaling each channel.
class SEBlock : public Module {
public:
    SEBlock() = default;
    SEBlock(std::string name, int channels, int reduction, Rng& rng)
        : channels_(channels),
          fc1_(name + ".fc1", channels, std::max(1, channels / reduction), Activation::relu, rng),
          fc2_(name + ".fc2", std::max(1, channels / reduction), channels, Activation::sigmoid,
               rng) {}

    void collect_parameters(std::vector<Parameter*>& out) override {
        fc1_.collect_parameters(out);
        fc2_.collect_parameters(out);
    }

    Tensor forward(const Tensor& x) {
        check(x.rank() == 4 && x.dim(1) == channels_, "SEBlock: input shape mismatch");
        x_ = x;
        const int n = x.dim(0), c = channels_, h = x.dim(2), w = x.dim(3);
        const int64_t plane = static_cast<int64_t>(h) * w;

        Mat squeezed(n, c);
        for (int i = 0; i < n; ++i) {
            auto xi = x.sample_mat(i);
            squeezed.row(i) = xi.rowwise().mean().transpose();
        }
        gate_ = fc2_.forward(fc1_.forward(squeezed));

        Tensor y(x.shape());
        for (int i = 0; i < n; ++i) {
            for (int ch = 0; ch < c; ++ch) {
                const float* px = x.data() + (static_cast<int64_t>(i) * c + ch) * plane;
                float* py = y.data() + (static_cast<int64_t>(i) * c + ch) * plane;
                float g = gate_(i, ch);
                for (int64_t j = 0; j < plane; ++j) py[j] = px[j] * g;
            }
        }
        return y;
    }

    Tensor backward(const Tensor& dy) {
        const int n = dy.dim(0), c = channels_, h = dy.dim(2), w = dy.dim(3);
        const int64_t plane = static_cast<int64_t>(h) * w;

        Mat dgate(n, c);
        Tensor dx(dy.shape());
        for (int i = 0; i < n; ++i) {
            for (int ch = 0; ch < c; ++ch) {
                const float* pdy = dy.data() + (static_cast<int64_t>(i) * c + ch) * plane;
                const float* px = x_.data() + (static_cast<int64_t>(i) * c + ch) * plane;
                float* pdx = dx.data() + (static_cast<int64_t>(i) * c + ch) * plane;
                float g = gate_(i, ch);
                double acc = 0.0;
                for (int64_t j = 0; j < plane; ++j) {
                    acc += static_cast<double>(pdy[j]) * px[j];
                    pdx[j] = pdy[j] * g;
                }
                dgate(i, ch) = static_cast<float>(acc);
            }
        }

        Mat dsqueezed = fc1_.backward(fc2_.backward(dgate));
        float inv_plane = 1.0f / static_cast<float>(plane);
        for (int i = 0; i < n; ++i) {
            for (int ch = 0; ch < c; ++ch) {
                float* pdx = dx.data() + (static_cast<int64_t>(i) * c + ch) * plane;
                float add = dsqueezed(i, ch) * inv_plane;
                for (int64_t j = 0; j < plane; ++j) pdx[j] += add;
            }
        }
        return dx;
    }

    const Mat& last_gate() const { return gate_; }

private:
    int channels_ = 0;
    Dense fc1_, fc2_;
    Tensor x_;
    Mat gate_;
};

}  // namespace memotion::nn

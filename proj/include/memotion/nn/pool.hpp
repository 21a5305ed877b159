#pragma once

#include <limits>
#include <vector>

#include "memotion/core/error.hpp"
#include "memotion/core/tensor.hpp"
#include "memotion/nn/conv.hpp"
#include "memotion/nn/module.hpp"

namespace memotion::nn {

class MaxPool2d : public Module {
public:
    MaxPool2d(int kernel, int stride, int pad = 0) : kernel_(kernel), stride_(stride), pad_(pad) {}

    void collect_parameters(std::vector<Parameter*>&) override {}

    Tensor forward(const Tensor& x) {
        check(x.rank() == 4, "MaxPool2d: rank-4 input expected");
        const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
        const int oh = conv_out_dim(h, kernel_, stride_, pad_);
        const int ow = conv_out_dim(w, kernel_, stride_, pad_);
        in_shape_ = x.shape();
        Tensor y({n, c, oh, ow});
        argmax_.assign(static_cast<size_t>(y.size()), -1);
        int64_t out_idx = 0;
        for (int i = 0; i < n; ++i) {
            for (int ch = 0; ch < c; ++ch) {
                const float* plane =
                    x.data() + (static_cast<int64_t>(i) * c + ch) * h * w;
                for (int oi = 0; oi < oh; ++oi) {
                    for (int oj = 0; oj < ow; ++oj, ++out_idx) {
                        float best = -std::numeric_limits<float>::infinity();
                        int64_t best_at = -1;
                        for (int ki = 0; ki < kernel_; ++ki) {
                            int yi = oi * stride_ - pad_ + ki;
                            if (yi < 0 || yi >= h) continue;
                            for (int kj = 0; kj < kernel_; ++kj) {
                                int xj = oj * stride_ - pad_ + kj;
                                if (xj < 0 || xj >= w) continue;
                                float v = plane[yi * w + xj];
                                if (v > best) {
                                    best = v;
                                    best_at = (static_cast<int64_t>(i) * c + ch) * h * w + yi * w + xj;
                                }
                            }
                        }
                        y[out_idx] = best_at >= 0 ? best : 0.0f;
                        argmax_[static_cast<size_t>(out_idx)] = best_at;
                    }
                }
            }
        }
        return y;
    }

    Tensor backward(const Tensor& dy) {
        Tensor dx(in_shape_);
        for (int64_t i = 0; i < dy.size(); ++i) {
            int64_t at = argmax_[static_cast<size_t>(i)];
            if (at >= 0) dx[at] += dy[i];
        }
        return dx;
    }

private:
    int kernel_, stride_, pad_;
    std::vector<int> in_shape_;
    std::vector<int64_t> argmax_;
};

}  // namespace memotion::nn

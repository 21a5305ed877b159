#pragma once

#include <string>

#include "memotion/core/error.hpp"
#include "memotion/core/tensor.hpp"
#include "memotion/nn/module.hpp"

namespace memotion::nn {

inline int conv_out_dim(int in, int kernel, int stride, int pad) {
    return (in + 2 * pad - kernel) / stride + 1;
}

// 2-D convolution over NCHW tensors via im2col + GEMM. Column buffers are
// rebuilt in backward instead of cached; recompute is cheaper than holding
// K x P floats per layer for a whole deep backbone.
class Conv2d : public Module {
public:
    Conv2d() = default;
    Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad, Rng& rng,
           bool bias = true)
        : in_ch_(in_ch),
          out_ch_(out_ch),
          kernel_(kernel),
          stride_(stride),
          pad_(pad),
          has_bias_(bias),
          weight_(name + ".weight", {out_ch, in_ch, kernel, kernel}) {
        he_uniform_init(weight_.value, in_ch * kernel * kernel, rng);
        if (has_bias_) {
            bias_ = Parameter(name + ".bias", {out_ch});
            bias_.value.set_zero();
        }
    }

    void collect_parameters(std::vector<Parameter*>& out) override {
        out.push_back(&weight_);
        if (has_bias_) out.push_back(&bias_);
    }

    int out_channels() const { return out_ch_; }

    Tensor forward(const Tensor& x) {
        check(x.rank() == 4 && x.dim(1) == in_ch_, "Conv2d: input shape mismatch");
        x_ = x;
        const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
        const int oh = conv_out_dim(h, kernel_, stride_, pad_);
        const int ow = conv_out_dim(w, kernel_, stride_, pad_);
        check(oh >= 1 && ow >= 1, "Conv2d: input spatially smaller than kernel");
        Tensor y({n, out_ch_, oh, ow});
        const int k = in_ch_ * kernel_ * kernel_;
        Mat cols(k, oh * ow);
        auto wmat = weight_.value.mat(out_ch_, k);
        for (int i = 0; i < n; ++i) {
            im2col(x, i, cols);
            auto yi = y.sample_mat(i);
            yi.noalias() = wmat * cols;
            if (has_bias_) {
                auto b = bias_.value.mat(out_ch_, 1);
                yi.colwise() += b.col(0);
            }
        }
        out_h_ = oh;
        out_w_ = ow;
        return y;
    }

    Tensor backward(const Tensor& dy) {
        const int n = x_.dim(0);
        const int k = in_ch_ * kernel_ * kernel_;
        Tensor dx(x_.shape());
        Mat cols(k, out_h_ * out_w_);
        Mat dcols(k, out_h_ * out_w_);
        auto wmat = weight_.value.mat(out_ch_, k);
        auto dwmat = weight_.grad.mat(out_ch_, k);
        for (int i = 0; i < n; ++i) {
            auto dyi = dy.sample_mat(i);
            im2col(x_, i, cols);
            dwmat.noalias() += dyi * cols.transpose();
            if (has_bias_) {
                auto db = bias_.grad.mat(out_ch_, 1);
                db.col(0) += dyi.rowwise().sum();
            }
            dcols.noalias() = wmat.transpose() * dyi;
            col2im(dcols, dx, i);
        }
        return dx;
    }

private:
    int in_ch_ = 0, out_ch_ = 0, kernel_ = 1, stride_ = 1, pad_ = 0;
    bool has_bias_ = true;
    Parameter weight_;
    Parameter bias_;
    Tensor x_;
    int out_h_ = 0, out_w_ = 0;

    void im2col(const Tensor& x, int sample, Mat& cols) const {
        const int h = x.dim(2), w = x.dim(3);
        const float* base = x.data() + static_cast<int64_t>(sample) * in_ch_ * h * w;
        int row = 0;
        for (int c = 0; c < in_ch_; ++c) {
            const float* plane = base + static_cast<int64_t>(c) * h * w;
            for (int ki = 0; ki < kernel_; ++ki) {
                for (int kj = 0; kj < kernel_; ++kj, ++row) {
                    float* dst = cols.data() + static_cast<int64_t>(row) * cols.cols();
                    int p = 0;
                    for (int oi = 0; oi < out_h_impl(h); ++oi) {
                        int yi = oi * stride_ - pad_ + ki;
                        for (int oj = 0; oj < out_w_impl(w); ++oj, ++p) {
                            int xj = oj * stride_ - pad_ + kj;
                            dst[p] = (yi >= 0 && yi < h && xj >= 0 && xj < w)
                                         ? plane[yi * w + xj]
                                         : 0.0f;
                        }
                    }
                }
            }
        }
    }

    void col2im(const Mat& dcols, Tensor& dx, int sample) const {
        const int h = dx.dim(2), w = dx.dim(3);
        float* base = dx.data() + static_cast<int64_t>(sample) * in_ch_ * h * w;
        int row = 0;
        for (int c = 0; c < in_ch_; ++c) {
            float* plane = base + static_cast<int64_t>(c) * h * w;
            for (int ki = 0; ki < kernel_; ++ki) {
                for (int kj = 0; kj < kernel_; ++kj, ++row) {
                    const float* src = dcols.data() + static_cast<int64_t>(row) * dcols.cols();
                    int p = 0;
                    for (int oi = 0; oi < out_h_; ++oi) {
                        int yi = oi * stride_ - pad_ + ki;
                        for (int oj = 0; oj < out_w_; ++oj, ++p) {
                            int xj = oj * stride_ - pad_ + kj;
                            if (yi >= 0 && yi < h && xj >= 0 && xj < w) plane[yi * w + xj] += src[p];
                        }
                    }
                }
            }
        }
    }

    int out_h_impl(int h) const { return conv_out_dim(h, kernel_, stride_, pad_); }
    int out_w_impl(int w) const { return conv_out_dim(w, kernel_, stride_, pad_); }
};

}  // namespace memotion::nn

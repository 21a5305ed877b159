#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "memotion/core/error.hpp"
#include "memotion/core/tensor.hpp"
#include "memotion/nn/module.hpp"

namespace memotion::nn {

// Per-channel batch normalization over NCHW. Training mode normalizes with
// batch statistics and maintains running estimates for eval mode.
class BatchNorm2d : public Module {
public:
    BatchNorm2d() = default;
    BatchNorm2d(std::string name, int channels, float momentum = 0.1f, float eps = 1e-5f)
        : channels_(channels),
          momentum_(momentum),
          eps_(eps),
          gamma_(name + ".gamma", {channels}),
          beta_(name + ".beta", {channels}),
          running_mean_(name + ".running_mean", {channels}, /*train=*/false),
          running_var_(name + ".running_var", {channels}, /*train=*/false) {
        gamma_.value.fill(1.0f);
        beta_.value.set_zero();
        running_mean_.value.set_zero();
        running_var_.value.fill(1.0f);
    }

    void collect_parameters(std::vector<Parameter*>& out) override {
        out.push_back(&gamma_);
        out.push_back(&beta_);
        out.push_back(&running_mean_);
        out.push_back(&running_var_);
    }

    Tensor forward(const Tensor& x) {
        check(x.rank() == 4 && x.dim(1) == channels_, "BatchNorm2d: input shape mismatch");
        const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
        const int64_t plane = static_cast<int64_t>(h) * w;
        const int64_t m = static_cast<int64_t>(n) * plane;
        used_batch_stats_ = training_;

        xhat_ = Tensor(x.shape());
        invstd_.assign(static_cast<size_t>(channels_), 0.0f);
        Tensor y(x.shape());

        for (int c = 0; c < channels_; ++c) {
            float mean, var;
            if (training_) {
                double sum = 0.0, sq = 0.0;
                for (int i = 0; i < n; ++i) {
                    const float* p = plane_ptr(x, i, c, plane);
                    for (int64_t j = 0; j < plane; ++j) {
                        sum += p[j];
                        sq += static_cast<double>(p[j]) * p[j];
                    }
                }
                mean = static_cast<float>(sum / static_cast<double>(m));
                var = static_cast<float>(sq / static_cast<double>(m)) - mean * mean;
                var = std::max(var, 0.0f);
                float unbiased = m > 1 ? var * static_cast<float>(m) / static_cast<float>(m - 1) : var;
                running_mean_.value[c] = (1 - momentum_) * running_mean_.value[c] + momentum_ * mean;
                running_var_.value[c] = (1 - momentum_) * running_var_.value[c] + momentum_ * unbiased;
            } else {
                mean = running_mean_.value[c];
                var = running_var_.value[c];
            }
            float inv = 1.0f / std::sqrt(var + eps_);
            invstd_[static_cast<size_t>(c)] = inv;
            float g = gamma_.value[c], b = beta_.value[c];
            for (int i = 0; i < n; ++i) {
                const float* px = plane_ptr(x, i, c, plane);
                float* ph = plane_ptr(xhat_, i, c, plane);
                float* py = plane_ptr(y, i, c, plane);
                for (int64_t j = 0; j < plane; ++j) {
                    ph[j] = (px[j] - mean) * inv;
                    py[j] = g * ph[j] + b;
                }
            }
        }
        return y;
    }

    Tensor backward(const Tensor& dy) {
        const int n = dy.dim(0), h = dy.dim(2), w = dy.dim(3);
        const int64_t plane = static_cast<int64_t>(h) * w;
        const int64_t m = static_cast<int64_t>(n) * plane;
        Tensor dx(dy.shape());

        for (int c = 0; c < channels_; ++c) {
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (int i = 0; i < n; ++i) {
                const float* pdy = plane_ptr(dy, i, c, plane);
                const float* ph = plane_ptr(xhat_, i, c, plane);
                for (int64_t j = 0; j < plane; ++j) {
                    sum_dy += pdy[j];
                    sum_dy_xhat += static_cast<double>(pdy[j]) * ph[j];
                }
            }
            gamma_.grad[c] += static_cast<float>(sum_dy_xhat);
            beta_.grad[c] += static_cast<float>(sum_dy);

            float g = gamma_.value[c];
            float inv = invstd_[static_cast<size_t>(c)];
            for (int i = 0; i < n; ++i) {
                const float* pdy = plane_ptr(dy, i, c, plane);
                const float* ph = plane_ptr(xhat_, i, c, plane);
                float* pdx = plane_ptr(dx, i, c, plane);
                if (used_batch_stats_) {
                    float k1 = static_cast<float>(sum_dy / static_cast<double>(m));
                    float k2 = static_cast<float>(sum_dy_xhat / static_cast<double>(m));
                    for (int64_t j = 0; j < plane; ++j)
                        pdx[j] = g * inv * (pdy[j] - k1 - ph[j] * k2);
                } else {
                    for (int64_t j = 0; j < plane; ++j) pdx[j] = g * inv * pdy[j];
                }
            }
        }
        return dx;
    }

private:
    int channels_ = 0;
    float momentum_ = 0.1f;
    float eps_ = 1e-5f;
    Parameter gamma_, beta_, running_mean_, running_var_;
    Tensor xhat_;
    std::vector<float> invstd_;
    bool used_batch_stats_ = true;

    template <class T>
    static auto* plane_ptr(T& t, int sample, int channel, int64_t plane) {
        return t.data() + (static_cast<int64_t>(sample) * t.dim(1) + channel) * plane;
    }
};

}  // namespace memotion::nn

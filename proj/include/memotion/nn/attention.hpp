#pragma once

#include <string>
#include <vector>

#include "memotion/core/error.hpp"
#include "memotion/core/tensor.hpp"
#include "memotion/nn/module.hpp"

namespace memotion::nn {

// Multihead contextual attention: each head owns a learned context vector
// that scores every time step of its slice of the hidden sequence; scores
// are softmax-normalized over valid (unmasked) steps, and the output is the
// per-step weight-rescaled hidden state with heads concatenated back.
//
// With zero valid steps the weights (and outputs) are all zero.
class ContextualAttention : public Module {
public:
    ContextualAttention() = default;
    ContextualAttention(std::string name, int width, int heads, Rng& rng)
        : width_(width), heads_(heads), context_(name + ".context", {heads, width / heads}) {
        if (heads < 1 || width % heads != 0)
            throw ModelError("ContextualAttention: width must be divisible by heads");
        glorot_uniform_init(context_.value, width / heads, 1, rng);
    }

    void collect_parameters(std::vector<Parameter*>& out) override { out.push_back(&context_); }

    struct Output {
        Tensor attended;  // {N, L, width}
        Tensor weights;   // {N, heads, L}
    };

    Output forward(const Tensor& h, const Mat& mask) {
        check(h.rank() == 3 && h.dim(2) == width_, "ContextualAttention: input width mismatch");
        h_ = h;
        mask_ = mask;
        const int n = h.dim(0), l = h.dim(1), hd = width_ / heads_;
        auto u = context_.value.mat(heads_, hd);

        Output out{Tensor({n, l, width_}), Tensor({n, heads_, l})};
        auto h2 = h.mat(n * l, width_);
        auto a2 = out.attended.mat(n * l, width_);
        a2.setZero();

        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < heads_; ++k) {
                // masked softmax over the scores of this head
                float max_s = -std::numeric_limits<float>::infinity();
                std::vector<float> scores(static_cast<size_t>(l), 0.0f);
                bool any_valid = false;
                for (int t = 0; t < l; ++t) {
                    if (mask(i, t) <= 0.0f) continue;
                    float s = h2.row(i * l + t).segment(k * hd, hd).dot(u.row(k));
                    scores[static_cast<size_t>(t)] = s;
                    max_s = std::max(max_s, s);
                    any_valid = true;
                }
                double z = 0.0;
                for (int t = 0; t < l; ++t) {
                    float w = 0.0f;
                    if (any_valid && mask(i, t) > 0.0f) {
                        w = std::exp(scores[static_cast<size_t>(t)] - max_s);
                        z += w;
                    }
                    out.weights[(static_cast<int64_t>(i) * heads_ + k) * l + t] = w;
                }
                for (int t = 0; t < l; ++t) {
                    int64_t wi = (static_cast<int64_t>(i) * heads_ + k) * l + t;
                    float w = z > 0.0 ? static_cast<float>(out.weights[wi] / z) : 0.0f;
                    out.weights[wi] = w;
                    a2.row(i * l + t).segment(k * hd, hd) =
                        w * h2.row(i * l + t).segment(k * hd, hd);
                }
            }
        }
        weights_ = out.weights;
        return out;
    }

    // d_attended: {N, L, width}. Returns dH; accumulates the context grads.
    Tensor backward(const Tensor& d_attended) {
        const int n = h_.dim(0), l = h_.dim(1), hd = width_ / heads_;
        auto u = context_.value.mat(heads_, hd);
        auto du = context_.grad.mat(heads_, hd);
        auto h2 = h_.mat(n * l, width_);
        auto da2 = d_attended.mat(n * l, width_);

        Tensor dh({n, l, width_});
        auto dh2 = dh.mat(n * l, width_);
        dh2.setZero();

        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < heads_; ++k) {
                // value path + weight gradient
                std::vector<float> dw(static_cast<size_t>(l), 0.0f);
                double wdw = 0.0;
                for (int t = 0; t < l; ++t) {
                    int64_t wi = (static_cast<int64_t>(i) * heads_ + k) * l + t;
                    float w = weights_[wi];
                    auto da = da2.row(i * l + t).segment(k * hd, hd);
                    dh2.row(i * l + t).segment(k * hd, hd) += w * da;
                    float d = da.dot(h2.row(i * l + t).segment(k * hd, hd));
                    dw[static_cast<size_t>(t)] = d;
                    wdw += static_cast<double>(w) * d;
                }
                // softmax backward, then score path into u and h
                for (int t = 0; t < l; ++t) {
                    int64_t wi = (static_cast<int64_t>(i) * heads_ + k) * l + t;
                    float w = weights_[wi];
                    if (w == 0.0f) continue;
                    float ds = w * (dw[static_cast<size_t>(t)] - static_cast<float>(wdw));
                    du.row(k) += ds * h2.row(i * l + t).segment(k * hd, hd);
                    dh2.row(i * l + t).segment(k * hd, hd) += ds * u.row(k);
                }
            }
        }
        return dh;
    }

    const Tensor& last_weights() const { return weights_; }

private:
    int width_ = 0, heads_ = 1;
    Parameter context_;
    Tensor h_;
    Tensor weights_;
    Mat mask_;
};

}  // namespace memotion::nn

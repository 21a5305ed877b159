#pragma once

#include <string>

#include "memotion/core/error.hpp"
#include "memotion/core/tensor.hpp"
#include "memotion/nn/module.hpp"

namespace memotion::nn {

enum class Activation { none, relu, sigmoid, tanh };

inline void apply_activation(Activation act, Mat& z) {
    switch (act) {
        case Activation::none:
            break;
        case Activation::relu:
            z = z.cwiseMax(0.0f);
            break;
        case Activation::sigmoid:
            z = z.unaryExpr([](float v) { return 1.0f / (1.0f + std::exp(-v)); });
            break;
        case Activation::tanh:
            z = z.array().tanh().matrix();
            break;
    }
}

// Derivative expressed through the cached *output* y = act(z).
inline Mat activation_grad_from_output(Activation act, const Mat& y, const Mat& dy) {
    switch (act) {
        case Activation::none:
            return dy;
        case Activation::relu:
            return (y.array() > 0.0f).cast<float>() * dy.array();
        case Activation::sigmoid:
            return (y.array() * (1.0f - y.array()) * dy.array()).matrix();
        case Activation::tanh:
            return ((1.0f - y.array().square()) * dy.array()).matrix();
    }
    return dy;
}

// Fully connected layer y = act(x W^T + b), rows of x are samples.
class Dense : public Module {
public:
    Dense() = default;
    Dense(std::string name, int in_dim, int out_dim, Activation act, Rng& rng)
        : act_(act),
          in_dim_(in_dim),
          out_dim_(out_dim),
          weight_(name + ".weight", {out_dim, in_dim}),
          bias_(name + ".bias", {out_dim}) {
        he_uniform_init(weight_.value, in_dim, rng);
        bias_.value.set_zero();
    }

    int in_dim() const { return in_dim_; }
    int out_dim() const { return out_dim_; }
    Activation activation() const { return act_; }

    Parameter& weight() { return weight_; }
    Parameter& bias() { return bias_; }

    void collect_parameters(std::vector<Parameter*>& out) override {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }

    Mat forward(const Mat& x) {
        check(static_cast<int>(x.cols()) == in_dim_, "Dense: input dim mismatch");
        x_ = x;
        auto w = weight_.value.mat(out_dim_, in_dim_);
        auto b = bias_.value.mat(1, out_dim_);
        Mat z = x * w.transpose();
        z.rowwise() += b.row(0);
        apply_activation(act_, z);
        y_ = z;
        return y_;
    }

    // dy is the gradient w.r.t. the post-activation output.
    Mat backward(const Mat& dy) {
        Mat dz = activation_grad_from_output(act_, y_, dy);
        return backward_preact(dz);
    }

    // dz is the gradient w.r.t. the pre-activation logits; used where the
    // loss fuses with the sigmoid for numerical stability.
    Mat backward_preact(const Mat& dz) {
        check(dz.rows() == x_.rows() && static_cast<int>(dz.cols()) == out_dim_,
              "Dense: grad shape mismatch");
        auto w = weight_.value.mat(out_dim_, in_dim_);
        auto dw = weight_.grad.mat(out_dim_, in_dim_);
        auto db = bias_.grad.mat(1, out_dim_);
        dw.noalias() += dz.transpose() * x_;
        db.row(0) += dz.colwise().sum();
        return dz * w;
    }

    const Mat& output() const { return y_; }

private:
    Activation act_ = Activation::none;
    int in_dim_ = 0;
    int out_dim_ = 0;
    Parameter weight_;
    Parameter bias_;
    Mat x_;
    Mat y_;
};

}  // namespace memotion::nn

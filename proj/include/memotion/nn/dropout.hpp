#pragma once

#include "memotion/core/rng.hpp"
#include "memotion/core/tensor.hpp"
#include "memotion/nn/module.hpp"

namespace memotion::nn {

// Inverted dropout on 2-D activations. Identity in eval mode. The RNG is
// owned by the model and reseeded per training step so masks are a pure
// function of (seed, epoch, step).
class Dropout : public Module {
public:
    explicit Dropout(float rate = 0.0f) : rate_(rate) {}

    void set_rng(Rng* rng) { rng_ = rng; }
    float rate() const { return rate_; }

    void collect_parameters(std::vector<Parameter*>&) override {}

    Mat forward(const Mat& x) {
        if (!training_ || rate_ <= 0.0f || rng_ == nullptr) {
            active_ = false;
            return x;
        }
        active_ = true;
        float keep = 1.0f - rate_;
        mask_.resize(x.rows(), x.cols());
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < x.cols(); ++j)
                mask_(i, j) = rng_->bernoulli(keep) ? 1.0f / keep : 0.0f;
        return x.cwiseProduct(mask_);
    }

    Mat backward(const Mat& dy) {
        if (!active_) return dy;
        return dy.cwiseProduct(mask_);
    }

private:
    float rate_;
    Rng* rng_ = nullptr;
    Mat mask_;
    bool active_ = false;
};

}  // namespace memotion::nn

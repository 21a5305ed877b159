#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "memotion/core/rng.hpp"
#include "memotion/core/tensor.hpp"

namespace memotion::nn {

// Named tensor with gradient storage. Buffers (e.g. batch-norm running
// stats) set trainable = false: they are checkpointed but never updated by
// the optimizer and carry no gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    bool trainable = true;

    Parameter() = default;
    Parameter(std::string n, std::vector<int> shape, bool train = true)
        : name(std::move(n)), value(shape), grad(shape), trainable(train) {}

    void zero_grad() { grad.set_zero(); }
};

class Module {
public:
    virtual ~Module() = default;

    // Appends this module's parameters (and buffers) in a stable order.
    virtual void collect_parameters(std::vector<Parameter*>& out) = 0;

    virtual void set_training(bool training) { training_ = training; }
    bool training() const { return training_; }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        collect_parameters(out);
        return out;
    }

    void zero_grad() {
        for (auto* p : parameters()) p->zero_grad();
    }

protected:
    bool training_ = true;
};

inline void he_uniform_init(Tensor& t, int fan_in, Rng& rng) {
    float bound = std::sqrt(6.0f / static_cast<float>(fan_in));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
}

inline void glorot_uniform_init(Tensor& t, int fan_in, int fan_out, Rng& rng) {
    float bound = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
}

inline void normal_init(Tensor& t, float stddev, Rng& rng) {
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.normal(0.0f, stddev);
}

}  // namespace memotion::nn

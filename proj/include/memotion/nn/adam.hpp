#pragma once

#include <cmath>
#include <vector>

#include "memotion/core/error.hpp"
#include "memotion/core/serialize.hpp"
#include "memotion/core/tensor.hpp"
#include "memotion/nn/module.hpp"

namespace memotion::nn {

// Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8). Moment
// buffers are created lazily on the first step and serialized with
// checkpoints so a resumed run is bit-identical to an uninterrupted one.
class Adam {
public:
    explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Parameter*>& params, double lr) {
        ensure_state(params);
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, t_);
        double bc2 = 1.0 - std::pow(beta2_, t_);
        size_t slot = 0;
        for (auto* p : params) {
            if (!p->trainable) continue;
            Tensor& m = m_[slot];
            Tensor& v = v_[slot];
            ++slot;
            const float b1 = static_cast<float>(beta1_), b2 = static_cast<float>(beta2_);
            for (int64_t i = 0; i < p->value.size(); ++i) {
                float g = p->grad[i];
                m[i] = b1 * m[i] + (1.0f - b1) * g;
                v[i] = b2 * v[i] + (1.0f - b2) * g * g;
                double mhat = m[i] / bc1;
                double vhat = v[i] / bc2;
                p->value[i] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

    int64_t step_count() const { return t_; }

    void save(std::ostream& out) const {
        io::write_pod<int64_t>(out, t_);
        io::write_pod<int32_t>(out, static_cast<int32_t>(m_.size()));
        for (size_t i = 0; i < m_.size(); ++i) {
            io::write_tensor(out, m_[i]);
            io::write_tensor(out, v_[i]);
        }
    }

    void load(std::istream& in) {
        t_ = io::read_pod<int64_t>(in);
        auto n = io::read_pod<int32_t>(in);
        m_.resize(static_cast<size_t>(n));
        v_.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            m_[static_cast<size_t>(i)] = io::read_tensor(in);
            v_[static_cast<size_t>(i)] = io::read_tensor(in);
        }
    }

private:
    double beta1_, beta2_, eps_;
    int64_t t_ = 0;
    std::vector<Tensor> m_, v_;

    void ensure_state(const std::vector<Parameter*>& params) {
        if (!m_.empty()) return;
        for (auto* p : params) {
            if (!p->trainable) continue;
            m_.emplace_back(p->value.shape());
            v_.emplace_back(p->value.shape());
        }
    }
};

}  // namespace memotion::nn

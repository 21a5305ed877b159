#pragma once

#include <string>

#include "memotion/core/error.hpp"
#include "memotion/core/tensor.hpp"
#include "memotion/nn/module.hpp"

namespace memotion::nn {

// Trainable token embedding table. forward maps int ids (N x L) to a
// {N, L, D} tensor; backward scatter-adds into the table gradient.
class Embedding : public Module {
public:
    Embedding() = default;
    Embedding(std::string name, int vocab_size, int dim, Rng& rng)
        : vocab_(vocab_size), dim_(dim), table_(name + ".weight", {vocab_size, dim}) {
        normal_init(table_.value, 0.05f, rng);
    }

    void collect_parameters(std::vector<Parameter*>& out) override { out.push_back(&table_); }

    int dim() const { return dim_; }
    int vocab_size() const { return vocab_; }

    Tensor forward(const IMat& ids) {
        ids_ = ids;
        const int n = static_cast<int>(ids.rows()), l = static_cast<int>(ids.cols());
        Tensor y({n, l, dim_});
        auto table = table_.value.mat(vocab_, dim_);
        auto out = y.mat(n * l, dim_);
        for (int i = 0; i < n; ++i) {
            for (int t = 0; t < l; ++t) {
                int id = ids(i, t);
                if (id < 0 || id >= vocab_)
                    throw ModelError("Embedding: token id " + std::to_string(id) +
                                     " outside vocabulary of size " + std::to_string(vocab_));
                out.row(i * l + t) = table.row(id);
            }
        }
        return y;
    }

    void backward(const Tensor& dy) {
        const int n = static_cast<int>(ids_.rows()), l = static_cast<int>(ids_.cols());
        auto grad = table_.grad.mat(vocab_, dim_);
        auto d = dy.mat(n * l, dim_);
        for (int i = 0; i < n; ++i)
            for (int t = 0; t < l; ++t) grad.row(ids_(i, t)) += d.row(i * l + t);
    }

private:
    int vocab_ = 0, dim_ = 0;
    Parameter table_;
    IMat ids_;
};

}  // namespace memotion::nn

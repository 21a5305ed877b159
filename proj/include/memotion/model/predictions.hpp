#pragma once

#include <array>
#include <vector>

#include "memotion/core/error.hpp"
#include "memotion/core/tensor.hpp"
#include "memotion/data/labels.hpp"

namespace memotion::model {

// Five per-head probability matrices; row n is example n. Head dims are
// 3/4/4/4/2 (overall, humour, sarcasm, offensive, motivational).
struct PredictionBundle {
    Mat t1, t2, t3, t4, t5;

    int batch_size() const { return static_cast<int>(t1.rows()); }

    const Mat& head(int k) const {
        switch (k) {
            case 0: return t1;
            case 1: return t2;
            case 2: return t3;
            case 3: return t4;
            case 4: return t5;
        }
        throw ModelError("PredictionBundle: head index out of range");
    }
    Mat& head(int k) { return const_cast<Mat&>(static_cast<const PredictionBundle*>(this)->head(k)); }
};

struct DecodedLabels {
    data::LabelSet labels;          // Task A fine class + Task C fine classes
    std::array<int, 4> presence{};  // Task B bits (humour, sarcasm, offensive, motivational)
};

// Argmax with ties broken toward the lowest index.
inline int argmax_row(const Mat& m, int row) {
    int best = 0;
    for (int j = 1; j < m.cols(); ++j)
        if (m(row, j) > m(row, best)) best = j;
    return best;
}

// threshold is validated but the declared decode rule is argmax per head;
// Task B presence is derived from the Task C argmax via the hierarchy rule.
inline DecodedLabels decode_predictions(const PredictionBundle& bundle, int row,
                                        double threshold = 0.5) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ModelError("decode_predictions: threshold must lie in (0,1)");
    DecodedLabels out;
    out.labels = data::LabelSet::from_indices(
        {argmax_row(bundle.t1, row), argmax_row(bundle.t2, row), argmax_row(bundle.t3, row),
         argmax_row(bundle.t4, row), argmax_row(bundle.t5, row)});
    out.presence = data::presence_bits(out.labels);
    return out;
}

inline std::vector<DecodedLabels> decode_predictions(const PredictionBundle& bundle,
                                                     double threshold = 0.5) {
    std::vector<DecodedLabels> out;
    out.reserve(static_cast<size_t>(bundle.batch_size()));
    for (int n = 0; n < bundle.batch_size(); ++n)
        out.push_back(decode_predictions(bundle, n, threshold));
    return out;
}

// Gold targets viewed as a degenerate probability bundle (used by the
// decode(encode(x)) = x round-trip checks).
inline PredictionBundle bundle_from_targets(const std::vector<data::TargetVectors>& targets) {
    int n = static_cast<int>(targets.size());
    PredictionBundle b;
    b.t1.resize(n, 3);
    b.t2.resize(n, 4);
    b.t3.resize(n, 4);
    b.t4.resize(n, 4);
    b.t5.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        const auto& t = targets[static_cast<size_t>(i)];
        for (int j = 0; j < 3; ++j) b.t1(i, j) = t.t1[static_cast<size_t>(j)];
        for (int j = 0; j < 4; ++j) b.t2(i, j) = t.t2[static_cast<size_t>(j)];
        for (int j = 0; j < 4; ++j) b.t3(i, j) = t.t3[static_cast<size_t>(j)];
        for (int j = 0; j < 4; ++j) b.t4(i, j) = t.t4[static_cast<size_t>(j)];
        for (int j = 0; j < 2; ++j) b.t5(i, j) = t.t5[static_cast<size_t>(j)];
    }
    return b;
}

}  // namespace memotion::model

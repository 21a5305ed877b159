#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "memotion/core/error.hpp"

namespace memotion::eval {

// Per-class confusion counts for multi-class single-label scoring.
struct ConfusionCounts {
    std::vector<int64_t> tp;
    std::vector<int64_t> fp;
    std::vector<int64_t> fn;

    explicit ConfusionCounts(int num_classes = 0)
        : tp(static_cast<size_t>(num_classes), 0),
          fp(static_cast<size_t>(num_classes), 0),
          fn(static_cast<size_t>(num_classes), 0) {}

    int num_classes() const { return static_cast<int>(tp.size()); }
};

inline ConfusionCounts count_confusions(const std::vector<int>& gold,
                                        const std::vector<int>& predicted,
                                        int num_classes) {
    if (gold.size() != predicted.size())
        throw ModelError("f1_scores: gold and predicted lengths differ");
    ConfusionCounts c(num_classes);
    for (size_t i = 0; i < gold.size(); ++i) {
        int g = gold[i];
        int p = predicted[i];
        if (g < 0 || g >= num_classes) throw ModelError("f1_scores: gold label out of range");
        if (p < 0 || p >= num_classes) throw ModelError("f1_scores: predicted label out of range");
        if (g == p) {
            c.tp[static_cast<size_t>(g)]++;
        } else {
            c.fn[static_cast<size_t>(g)]++;
            c.fp[static_cast<size_t>(p)]++;
        }
    }
    return c;
}

// F1 = 2TP / (2TP + FP + FN), defined as 0 when the denominator is 0.
inline double f1_from_counts(int64_t tp, int64_t fp, int64_t fn) {
    int64_t denom = 2 * tp + fp + fn;
    if (denom == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

struct F1Result {
    double macro_f1 = 0.0;
    double micro_f1 = 0.0;
    std::vector<double> per_class_f1;
};

// Macro averages over *all* classes in the class list, including ones with
// no support; micro pools TP/FP/FN over classes first.
inline F1Result f1_scores(const std::vector<int>& gold, const std::vector<int>& predicted,
                          int num_classes) {
    ConfusionCounts c = count_confusions(gold, predicted, num_classes);
    F1Result r;
    r.per_class_f1.resize(static_cast<size_t>(num_classes));
    int64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
    double macro_acc = 0.0;
    for (int k = 0; k < num_classes; ++k) {
        auto i = static_cast<size_t>(k);
        r.per_class_f1[i] = f1_from_counts(c.tp[i], c.fp[i], c.fn[i]);
        macro_acc += r.per_class_f1[i];
        tp_sum += c.tp[i];
        fp_sum += c.fp[i];
        fn_sum += c.fn[i];
    }
    r.macro_f1 = num_classes > 0 ? macro_acc / num_classes : 0.0;
    r.micro_f1 = f1_from_counts(tp_sum, fp_sum, fn_sum);
    return r;
}

// String-labelled overload; classes defines both validity and index order.
inline F1Result f1_scores(const std::vector<std::string>& gold,
                          const std::vector<std::string>& predicted,
                          const std::vector<std::string>& classes) {
    auto to_ids = [&](const std::vector<std::string>& labels) {
        std::vector<int> ids;
        ids.reserve(labels.size());
        for (const auto& s : labels) {
            int id = -1;
            for (size_t k = 0; k < classes.size(); ++k)
                if (classes[k] == s) { id = static_cast<int>(k); break; }
            if (id < 0) throw ModelError("f1_scores: unknown label '" + s + "'");
            ids.push_back(id);
        }
        return ids;
    };
    return f1_scores(to_ids(gold), to_ids(predicted), static_cast<int>(classes.size()));
}

}  // namespace memotion::eval

#pragma once

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "memotion/core/error.hpp"

namespace memotion::data {

// Index order within each semantic class is fixed and defines the target
// vector layout everywhere downstream.
enum class Overall : int { positive = 0, negative = 1, neutral = 2 };
enum class Humour : int { not_funny = 0, funny = 1, very_funny = 2, hilarious = 3 };
enum class Sarcasm : int { no_sarcasm = 0, general = 1, twisted_meaning = 2, very_twisted = 3 };
enum class Offensive : int {
    not_offensive = 0,
    slightly_offensive = 1,
    very_offensive = 2,
    hateful_offensive = 3
};
enum class Motivational : int { not_motivational = 0, motivational = 1 };

constexpr std::array<int, 5> kHeadDims = {3, 4, 4, 4, 2};

inline const std::vector<std::string>& semantic_class_names() {
    static const std::vector<std::string> names = {"overall", "humour", "sarcasm", "offensive",
                                                   "motivational"};
    return names;
}

inline const std::vector<std::vector<std::string>>& fine_label_names() {
    static const std::vector<std::vector<std::string>> names = {
        {"positive", "negative", "neutral"},
        {"not_funny", "funny", "very_funny", "hilarious"},
        {"no_sarcasm", "general", "twisted_meaning", "very_twisted"},
        {"not_offensive", "slightly_offensive", "very_offensive", "hateful_offensive"},
        {"not_motivational", "motivational"},
    };
    return names;
}

struct LabelSet {
    Overall overall = Overall::neutral;
    Humour humour = Humour::not_funny;
    Sarcasm sarcasm = Sarcasm::no_sarcasm;
    Offensive offensive = Offensive::not_offensive;
    Motivational motivational = Motivational::not_motivational;

    bool operator==(const LabelSet&) const = default;

    std::array<int, 5> indices() const {
        return {static_cast<int>(overall), static_cast<int>(humour), static_cast<int>(sarcasm),
                static_cast<int>(offensive), static_cast<int>(motivational)};
    }

    static LabelSet from_indices(const std::array<int, 5>& ix) {
        for (int k = 0; k < 5; ++k)
            if (ix[static_cast<size_t>(k)] < 0 || ix[static_cast<size_t>(k)] >= kHeadDims[static_cast<size_t>(k)])
                throw ModelError("LabelSet::from_indices: index out of range");
        LabelSet l;
        l.overall = static_cast<Overall>(ix[0]);
        l.humour = static_cast<Humour>(ix[1]);
        l.sarcasm = static_cast<Sarcasm>(ix[2]);
        l.offensive = static_cast<Offensive>(ix[3]);
        l.motivational = static_cast<Motivational>(ix[4]);
        return l;
    }
};

// Task B presence bits: a category is "present" iff its fine label is not the
// category's absent class. Order: humour, sarcasm, offensive, motivational.
inline std::array<int, 4> presence_bits(const LabelSet& l) {
    return {l.humour != Humour::not_funny ? 1 : 0, l.sarcasm != Sarcasm::no_sarcasm ? 1 : 0,
            l.offensive != Offensive::not_offensive ? 1 : 0,
            l.motivational == Motivational::motivational ? 1 : 0};
}

struct TargetVectors {
    std::array<float, 3> t1{};
    std::array<float, 4> t2{};
    std::array<float, 4> t3{};
    std::array<float, 4> t4{};
    std::array<float, 2> t5{};
    std::array<int, 4> presence{};

    bool operator==(const TargetVectors&) const = default;
};

inline TargetVectors derive_task_targets(const LabelSet& labels) {
    TargetVectors t;
    t.t1[static_cast<size_t>(labels.overall)] = 1.0f;
    t.t2[static_cast<size_t>(labels.humour)] = 1.0f;
    t.t3[static_cast<size_t>(labels.sarcasm)] = 1.0f;
    t.t4[static_cast<size_t>(labels.offensive)] = 1.0f;
    t.t5[static_cast<size_t>(labels.motivational)] = 1.0f;
    t.presence = presence_bits(labels);
    return t;
}

namespace detail {
template <size_t N>
int one_hot_index(const std::array<float, N>& v) {
    int hot = -1;
    for (size_t i = 0; i < N; ++i) {
        if (v[i] == 1.0f) {
            if (hot >= 0) throw ModelError("target vector is not one-hot");
            hot = static_cast<int>(i);
        } else if (v[i] != 0.0f) {
            throw ModelError("target vector entries must be 0 or 1");
        }
    }
    if (hot < 0) throw ModelError("target vector has no hot entry");
    return hot;
}
}  // namespace detail

// Inverse of derive_task_targets; the pair forms a bijection over all
// 3*4*4*4*2 = 384 label combinations.
inline LabelSet decode_task_targets(const TargetVectors& t) {
    return LabelSet::from_indices({detail::one_hot_index(t.t1), detail::one_hot_index(t.t2),
                                   detail::one_hot_index(t.t3), detail::one_hot_index(t.t4),
                                   detail::one_hot_index(t.t5)});
}

// --- label string parsing ------------------------------------------------

// Lowercase, trim, and squash separators so "Very Funny", "very_funny" and
// " very-funny " all normalize to "very_funny".
inline std::string normalize_label(const std::string& raw) {
    std::string s;
    s.reserve(raw.size());
    for (char ch : raw) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (c == ' ' || c == '\t' || c == '-' || c == '_') {
            if (!s.empty() && s.back() != '_') s.push_back('_');
        } else {
            s.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    while (!s.empty() && s.back() == '_') s.pop_back();
    return s;
}

// Aliases used by the raw memotion-7k CSV for values that Table 1 reports
// under folded/renamed classes.
inline std::optional<std::string> fold_alias(const std::string& cls, const std::string& v) {
    if (cls == "overall") {
        if (v == "very_positive") return "positive";
        if (v == "very_negative") return "negative";
    } else if (cls == "sarcasm") {
        if (v == "not_sarcastic") return "no_sarcasm";
        if (v == "very_sarcastic") return "very_twisted";
    } else if (cls == "offensive") {
        if (v == "slight") return "slightly_offensive";
    }
    return std::nullopt;
}

// class_index: 0=overall .. 4=motivational. Returns the fine-label index.
inline std::optional<int> parse_fine_label(int class_index, const std::string& raw) {
    const auto& cls = semantic_class_names()[static_cast<size_t>(class_index)];
    std::string v = normalize_label(raw);
    if (auto folded = fold_alias(cls, v)) v = *folded;
    const auto& names = fine_label_names()[static_cast<size_t>(class_index)];
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == v) return static_cast<int>(i);
    return std::nullopt;
}

inline LabelSet parse_label_set(const std::array<std::string, 5>& raw_values) {
    std::array<int, 5> ix{};
    for (int k = 0; k < 5; ++k) {
        auto parsed = parse_fine_label(k, raw_values[static_cast<size_t>(k)]);
        if (!parsed)
            throw DataError("unknown " + semantic_class_names()[static_cast<size_t>(k)] +
                            " label: '" + raw_values[static_cast<size_t>(k)] + "'");
        ix[static_cast<size_t>(k)] = *parsed;
    }
    return LabelSet::from_indices(ix);
}

}  // namespace memotion::data

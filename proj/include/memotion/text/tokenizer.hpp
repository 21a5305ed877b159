#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "memotion/core/error.hpp"
#include "memotion/core/serialize.hpp"
#include "memotion/text/clean.hpp"

namespace memotion::text {

enum class SubwordAlgorithm { unigram, bpe };

inline std::string to_string(SubwordAlgorithm a) {
    return a == SubwordAlgorithm::unigram ? "unigram" : "bpe";
}

inline SubwordAlgorithm subword_algorithm_from_string(const std::string& s) {
    if (s == "unigram") return SubwordAlgorithm::unigram;
    if (s == "bpe") return SubwordAlgorithm::bpe;
    throw ConfigError("unknown subword algorithm: '" + s + "'");
}

struct TokenizerOptions {
    int vocab_size = 8000;
    SubwordAlgorithm algorithm = SubwordAlgorithm::unigram;
    uint64_t seed = 0;
    int max_piece_len = 8;  // in codepoints
};

struct TokenSequence {
    std::vector<int> ids;
    int valid_len = 0;
};

namespace utf8 {

// Splits UTF-8 into codepoint-sized byte chunks; malformed bytes come back as
// single-byte chunks so encoding stays total.
inline std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> cps;
    size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        size_t len = 1;
        if ((c & 0x80) == 0x00) len = 1;
        else if ((c & 0xE0) == 0xC0) len = 2;
        else if ((c & 0xF0) == 0xE0) len = 3;
        else if ((c & 0xF8) == 0xF0) len = 4;
        if (i + len > s.size()) len = 1;
        cps.push_back(s.substr(i, len));
        i += len;
    }
    return cps;
}

}  // namespace utf8

// SentencePiece-style word-start marker (U+2581 LOWER ONE EIGHTH BLOCK).
inline const std::string kWordMarker = "\xE2\x96\x81";

class SubwordTokenizer {
public:
    static constexpr int kPadId = 0;
    static constexpr int kUnkId = 1;
    static constexpr int kNumReserved = 2;

    SubwordTokenizer() = default;

    static SubwordTokenizer fit(const std::vector<std::string>& corpus,
                                const TokenizerOptions& options);

    int vocab_size() const { return kNumReserved + static_cast<int>(pieces_.size()); }
    int pad_id() const { return kPadId; }
    int unk_id() const { return kUnkId; }
    SubwordAlgorithm algorithm() const { return options_.algorithm; }
    uint64_t fit_seed() const { return options_.seed; }

    const std::string& piece(int id) const {
        static const std::string pad = "<pad>", unk = "<unk>";
        if (id == kPadId) return pad;
        if (id == kUnkId) return unk;
        return pieces_.at(static_cast<size_t>(id - kNumReserved));
    }

    std::vector<int> encode_ids(const std::string& text) const {
        std::vector<int> ids;
        for (const auto& word : whitespace_tokens(text)) {
            auto cps = utf8::split(kWordMarker + word);
            if (options_.algorithm == SubwordAlgorithm::unigram)
                encode_word_viterbi(cps, ids);
            else
                encode_word_bpe(cps, ids);
        }
        return ids;
    }

    // Fixed-length encoding: truncate to max_len, right-pad with pad_id.
    TokenSequence encode(const std::string& text, int max_len) const {
        check(max_len >= 1, "encode: max_len must be >= 1");
        TokenSequence seq;
        auto ids = encode_ids(text);
        seq.valid_len = std::min<int>(static_cast<int>(ids.size()), max_len);
        seq.ids.assign(static_cast<size_t>(max_len), kPadId);
        for (int i = 0; i < seq.valid_len; ++i) seq.ids[static_cast<size_t>(i)] = ids[static_cast<size_t>(i)];
        return seq;
    }

    std::string decode(const std::vector<int>& ids) const {
        std::string out;
        for (int id : ids) {
            if (id == kPadId || id == kUnkId) continue;
            const std::string& p = piece(id);
            if (p.rfind(kWordMarker, 0) == 0) {
                if (!out.empty()) out.push_back(' ');
                out += p.substr(kWordMarker.size());
            } else {
                out += p;
            }
        }
        return out;
    }

    // --- persistence -------------------------------------------------------

    std::string serialize() const {
        std::ostringstream out(std::ios::binary);
        out.write("MSPM0001", 8);
        io::write_pod<uint8_t>(out, options_.algorithm == SubwordAlgorithm::unigram ? 0 : 1);
        io::write_pod<int32_t>(out, options_.vocab_size);
        io::write_pod<uint64_t>(out, options_.seed);
        io::write_pod<int32_t>(out, options_.max_piece_len);
        io::write_pod<int32_t>(out, static_cast<int32_t>(pieces_.size()));
        for (size_t i = 0; i < pieces_.size(); ++i) {
            io::write_string(out, pieces_[i]);
            io::write_pod<float>(out, scores_[i]);
        }
        io::write_pod<int32_t>(out, static_cast<int32_t>(merges_.size()));
        for (const auto& [a, b] : merges_) {
            io::write_string(out, a);
            io::write_string(out, b);
        }
        return out.str();
    }

    static SubwordTokenizer deserialize(const std::string& blob) {
        std::istringstream in(blob, std::ios::binary);
        char magic[8];
        in.read(magic, 8);
        if (!in || std::string(magic, 8) != "MSPM0001")
            throw DataError("not a tokenizer model blob");
        SubwordTokenizer t;
        t.options_.algorithm =
            io::read_pod<uint8_t>(in) == 0 ? SubwordAlgorithm::unigram : SubwordAlgorithm::bpe;
        t.options_.vocab_size = io::read_pod<int32_t>(in);
        t.options_.seed = io::read_pod<uint64_t>(in);
        t.options_.max_piece_len = io::read_pod<int32_t>(in);
        auto n = io::read_pod<int32_t>(in);
        t.pieces_.resize(static_cast<size_t>(n));
        t.scores_.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            t.pieces_[static_cast<size_t>(i)] = io::read_string(in);
            t.scores_[static_cast<size_t>(i)] = io::read_pod<float>(in);
        }
        auto m = io::read_pod<int32_t>(in);
        t.merges_.resize(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) {
            t.merges_[static_cast<size_t>(i)].first = io::read_string(in);
            t.merges_[static_cast<size_t>(i)].second = io::read_string(in);
        }
        t.rebuild_index();
        return t;
    }

    void save(const std::string& model_path, const std::string& sidecar_path) const {
        {
            std::ofstream out(model_path, std::ios::binary);
            if (!out) throw DataError("cannot write tokenizer model: " + model_path);
            auto blob = serialize();
            out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
        }
        nlohmann::ordered_json side;
        side["vocab_size"] = vocab_size();
        side["pad_id"] = kPadId;
        side["unk_id"] = kUnkId;
        side["algorithm"] = to_string(options_.algorithm);
        side["fit_seed"] = options_.seed;
        side["model_fnv1a64"] = hex64(fnv1a64(serialize()));
        std::ofstream out(sidecar_path);
        if (!out) throw DataError("cannot write tokenizer sidecar: " + sidecar_path);
        out << side.dump(2) << "\n";
    }

    static SubwordTokenizer load(const std::string& model_path) {
        std::ifstream in(model_path, std::ios::binary);
        if (!in) throw DataError("cannot open tokenizer model: " + model_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return deserialize(ss.str());
    }

private:
    TokenizerOptions options_;
    std::vector<std::string> pieces_;  // id = index + kNumReserved
    std::vector<float> scores_;        // unigram: log prob; bpe: -merge rank (0 for alphabet)
    std::vector<std::pair<std::string, std::string>> merges_;  // bpe only, rank order
    std::unordered_map<std::string, int> piece_to_id_;
    std::map<std::pair<std::string, std::string>, int> merge_rank_;
    int max_piece_cp_ = 1;

    void rebuild_index() {
        piece_to_id_.clear();
        merge_rank_.clear();
        max_piece_cp_ = 1;
        for (size_t i = 0; i < pieces_.size(); ++i) {
            piece_to_id_[pieces_[i]] = static_cast<int>(i) + kNumReserved;
            max_piece_cp_ = std::max(max_piece_cp_, static_cast<int>(utf8::split(pieces_[i]).size()));
        }
        for (size_t r = 0; r < merges_.size(); ++r)
            merge_rank_[merges_[r]] = static_cast<int>(r);
    }

    int lookup(const std::string& piece) const {
        auto it = piece_to_id_.find(piece);
        return it == piece_to_id_.end() ? -1 : it->second;
    }

    float score_of(int id) const { return scores_.at(static_cast<size_t>(id - kNumReserved)); }

    // --- encoding ------------------------------------------------------------

    void encode_word_viterbi(const std::vector<std::string>& cps, std::vector<int>& out) const {
        const int m = static_cast<int>(cps.size());
        const float kUnkScore = -1.0e4f;
        std::vector<float> best(static_cast<size_t>(m) + 1, -std::numeric_limits<float>::infinity());
        std::vector<int> back_len(static_cast<size_t>(m) + 1, 0);
        std::vector<int> back_id(static_cast<size_t>(m) + 1, kUnkId);
        best[0] = 0.0f;
        for (int j = 1; j <= m; ++j) {
            int max_len = std::min(j, max_piece_cp_);
            std::string sub;
            for (int len = 1; len <= max_len; ++len) {
                int i = j - len;
                sub.clear();
                for (int k = i; k < j; ++k) sub += cps[static_cast<size_t>(k)];
                int id = lookup(sub);
                float s;
                if (id >= 0) {
                    s = score_of(id);
                } else if (len == 1) {
                    s = kUnkScore;  // unknown codepoint
                    id = kUnkId;
                } else {
                    continue;
                }
                if (best[static_cast<size_t>(i)] + s > best[static_cast<size_t>(j)]) {
                    best[static_cast<size_t>(j)] = best[static_cast<size_t>(i)] + s;
                    back_len[static_cast<size_t>(j)] = len;
                    back_id[static_cast<size_t>(j)] = id;
                }
            }
        }
        std::vector<int> rev;
        for (int j = m; j > 0; j -= back_len[static_cast<size_t>(j)])
            rev.push_back(back_id[static_cast<size_t>(j)]);
        out.insert(out.end(), rev.rbegin(), rev.rend());
    }

    void encode_word_bpe(const std::vector<std::string>& cps, std::vector<int>& out) const {
        std::vector<std::string> syms = cps;
        while (syms.size() > 1) {
            int best_rank = std::numeric_limits<int>::max();
            size_t best_pos = 0;
            for (size_t i = 0; i + 1 < syms.size(); ++i) {
                auto it = merge_rank_.find({syms[i], syms[i + 1]});
                if (it != merge_rank_.end() && it->second < best_rank) {
                    best_rank = it->second;
                    best_pos = i;
                }
            }
            if (best_rank == std::numeric_limits<int>::max()) break;
            syms[best_pos] += syms[best_pos + 1];
            syms.erase(syms.begin() + static_cast<std::ptrdiff_t>(best_pos) + 1);
        }
        for (const auto& s : syms) {
            int id = lookup(s);
            out.push_back(id >= 0 ? id : kUnkId);
        }
    }

    // --- training ------------------------------------------------------------

    using WordFreqs = std::map<std::string, int64_t>;

    static WordFreqs count_words(const std::vector<std::string>& corpus) {
        WordFreqs freqs;
        for (const auto& line : corpus)
            for (const auto& w : whitespace_tokens(line)) freqs[kWordMarker + w]++;
        return freqs;
    }

    static SubwordTokenizer fit_bpe(const WordFreqs& words, const TokenizerOptions& options,
                                    const std::set<std::string>& alphabet);
    static SubwordTokenizer fit_unigram(const WordFreqs& words, const TokenizerOptions& options,
                                        const std::set<std::string>& alphabet);
};

inline SubwordTokenizer SubwordTokenizer::fit(const std::vector<std::string>& corpus,
                                              const TokenizerOptions& options) {
    bool any = false;
    for (const auto& line : corpus)
        if (!whitespace_tokens(line).empty()) { any = true; break; }
    if (corpus.empty() || !any) throw ConfigError("fit_tokenizer: empty corpus");

    WordFreqs words = count_words(corpus);
    std::set<std::string> alphabet;
    for (const auto& [w, f] : words)
        for (const auto& cp : utf8::split(w)) alphabet.insert(cp);

    int min_vocab = kNumReserved + static_cast<int>(alphabet.size());
    if (options.vocab_size < min_vocab)
        throw ConfigError("fit_tokenizer: vocab_size " + std::to_string(options.vocab_size) +
                          " below character coverage minimum " + std::to_string(min_vocab));

    return options.algorithm == SubwordAlgorithm::bpe ? fit_bpe(words, options, alphabet)
                                                      : fit_unigram(words, options, alphabet);
}

inline SubwordTokenizer SubwordTokenizer::fit_bpe(const WordFreqs& words,
                                                  const TokenizerOptions& options,
                                                  const std::set<std::string>& alphabet) {
    struct Word {
        std::vector<std::string> syms;
        int64_t freq;
    };
    std::vector<Word> ws;
    ws.reserve(words.size());
    for (const auto& [w, f] : words) ws.push_back({utf8::split(w), f});

    using Pair = std::pair<std::string, std::string>;
    std::map<Pair, int64_t> pair_counts;
    std::map<Pair, std::set<size_t>> pair_words;

    auto add_word_pairs = [&](size_t wi, int64_t sign) {
        const auto& syms = ws[wi].syms;
        for (size_t i = 0; i + 1 < syms.size(); ++i) {
            Pair p{syms[i], syms[i + 1]};
            pair_counts[p] += sign * ws[wi].freq;
            if (sign > 0)
                pair_words[p].insert(wi);
        }
    };
    for (size_t wi = 0; wi < ws.size(); ++wi) add_word_pairs(wi, +1);

    int target_merges = options.vocab_size - kNumReserved - static_cast<int>(alphabet.size());
    std::vector<Pair> merges;
    merges.reserve(static_cast<size_t>(target_merges));

    for (int m = 0; m < target_merges; ++m) {
        // Highest count wins; ties resolve to the lexicographically smallest
        // pair so fits are reproducible.
        const Pair* best = nullptr;
        int64_t best_count = 0;
        for (const auto& [p, c] : pair_counts) {
            if (c > best_count) {
                best_count = c;
                best = &p;
            }
        }
        if (!best)
            throw ConfigError("fit_tokenizer: vocab_size " + std::to_string(options.vocab_size) +
                              " unattainable; corpus exhausted after " +
                              std::to_string(m + static_cast<int>(alphabet.size()) + kNumReserved) +
                              " pieces");
        Pair chosen = *best;
        merges.push_back(chosen);
        std::string merged = chosen.first + chosen.second;

        auto affected = pair_words[chosen];
        for (size_t wi : affected) {
            add_word_pairs(wi, -1);
            auto& syms = ws[wi].syms;
            for (size_t i = 0; i + 1 < syms.size();) {
                if (syms[i] == chosen.first && syms[i + 1] == chosen.second) {
                    syms[i] = merged;
                    syms.erase(syms.begin() + static_cast<std::ptrdiff_t>(i) + 1);
                } else {
                    ++i;
                }
            }
            add_word_pairs(wi, +1);
        }
        // Drop exhausted entries so the scan above stays tight.
        for (auto it = pair_counts.begin(); it != pair_counts.end();) {
            if (it->second <= 0) {
                pair_words.erase(it->first);
                it = pair_counts.erase(it);
            } else {
                ++it;
            }
        }
    }

    SubwordTokenizer t;
    t.options_ = options;
    for (const auto& cp : alphabet) {
        t.pieces_.push_back(cp);
        t.scores_.push_back(0.0f);
    }
    for (size_t r = 0; r < merges.size(); ++r) {
        t.pieces_.push_back(merges[r].first + merges[r].second);
        t.scores_.push_back(-static_cast<float>(r + 1));
    }
    t.merges_ = std::move(merges);
    t.rebuild_index();
    return t;
}

inline SubwordTokenizer SubwordTokenizer::fit_unigram(const WordFreqs& words,
                                                      const TokenizerOptions& options,
                                                      const std::set<std::string>& alphabet) {
    struct Word {
        std::vector<std::string> cps;
        int64_t freq;
    };
    std::vector<Word> ws;
    for (const auto& [w, f] : words) ws.push_back({utf8::split(w), f});

    // Seed candidates: every substring up to max_piece_len codepoints.
    std::map<std::string, double> seed_freq;
    for (const auto& w : ws) {
        int m = static_cast<int>(w.cps.size());
        for (int i = 0; i < m; ++i) {
            std::string sub;
            for (int j = i; j < std::min(m, i + options.max_piece_len); ++j) {
                sub += w.cps[static_cast<size_t>(j)];
                seed_freq[sub] += static_cast<double>(w.freq);
            }
        }
    }

    const int target_pieces = options.vocab_size - kNumReserved;
    const int num_singles = static_cast<int>(alphabet.size());
    const int target_multi = target_pieces - num_singles;

    // Multi-codepoint candidates ranked by frequency * length.
    std::vector<std::pair<std::string, double>> multi;
    for (const auto& [s, f] : seed_freq) {
        if (alphabet.count(s)) continue;
        double len = static_cast<double>(utf8::split(s).size());
        if (len < 2) continue;
        multi.emplace_back(s, f * len);
    }
    if (static_cast<int>(multi.size()) < target_multi)
        throw ConfigError("fit_tokenizer: vocab_size " + std::to_string(options.vocab_size) +
                          " unattainable; corpus yields only " +
                          std::to_string(multi.size() + static_cast<size_t>(num_singles) +
                                         kNumReserved) +
                          " candidate pieces");
    std::sort(multi.begin(), multi.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    size_t seed_cap = std::max<size_t>(static_cast<size_t>(target_multi) * 4, 1024);
    if (multi.size() > seed_cap) multi.resize(seed_cap);

    // piece -> log prob, seeded from the frequency scores.
    std::vector<std::string> cand;
    std::vector<double> logp;
    double total = 0;
    for (const auto& cp : alphabet) total += seed_freq[cp];
    for (const auto& [s, sc] : multi) total += sc;
    for (const auto& cp : alphabet) {
        cand.push_back(cp);
        logp.push_back(std::log(std::max(seed_freq[cp], 1e-9) / total));
    }
    for (const auto& [s, sc] : multi) {
        cand.push_back(s);
        logp.push_back(std::log(sc / total));
    }

    std::unordered_map<std::string, int> cand_index;
    auto reindex = [&]() {
        cand_index.clear();
        for (size_t i = 0; i < cand.size(); ++i) cand_index[cand[i]] = static_cast<int>(i);
    };
    reindex();

    auto em_iteration = [&]() {
        std::vector<double> expected(cand.size(), 0.0);
        std::vector<double> alpha, beta;
        const double kNegInf = -std::numeric_limits<double>::infinity();
        for (const auto& w : ws) {
            int m = static_cast<int>(w.cps.size());
            alpha.assign(static_cast<size_t>(m) + 1, kNegInf);
            beta.assign(static_cast<size_t>(m) + 1, kNegInf);
            alpha[0] = 0.0;
            // arcs[(i,j)] exists iff cps[i:j] is a live candidate
            auto arc = [&](int i, int j, std::string& buf) -> int {
                buf.clear();
                for (int k = i; k < j; ++k) buf += w.cps[static_cast<size_t>(k)];
                auto it = cand_index.find(buf);
                return it == cand_index.end() ? -1 : it->second;
            };
            std::string buf;
            auto logadd = [](double a, double b) {
                if (a == -std::numeric_limits<double>::infinity()) return b;
                if (b == -std::numeric_limits<double>::infinity()) return a;
                double hi = std::max(a, b), lo = std::min(a, b);
                return hi + std::log1p(std::exp(lo - hi));
            };
            for (int j = 1; j <= m; ++j)
                for (int i = std::max(0, j - options.max_piece_len); i < j; ++i) {
                    int id = arc(i, j, buf);
                    if (id < 0) continue;
                    alpha[static_cast<size_t>(j)] = logadd(
                        alpha[static_cast<size_t>(j)],
                        alpha[static_cast<size_t>(i)] + logp[static_cast<size_t>(id)]);
                }
            beta[static_cast<size_t>(m)] = 0.0;
            for (int i = m - 1; i >= 0; --i)
                for (int j = i + 1; j <= std::min(m, i + options.max_piece_len); ++j) {
                    int id = arc(i, j, buf);
                    if (id < 0) continue;
                    beta[static_cast<size_t>(i)] =
                        logadd(beta[static_cast<size_t>(i)],
                               logp[static_cast<size_t>(id)] + beta[static_cast<size_t>(j)]);
                }
            double z = alpha[static_cast<size_t>(m)];
            if (z == kNegInf) continue;  // unreachable only if singles were pruned (they never are)
            for (int i = 0; i < m; ++i)
                for (int j = i + 1; j <= std::min(m, i + options.max_piece_len); ++j) {
                    int id = arc(i, j, buf);
                    if (id < 0) continue;
                    double post = alpha[static_cast<size_t>(i)] + logp[static_cast<size_t>(id)] +
                                  beta[static_cast<size_t>(j)] - z;
                    expected[static_cast<size_t>(id)] += static_cast<double>(w.freq) * std::exp(post);
                }
        }
        // M-step; floor keeps mandatory singles encodable even at zero count.
        double sum = 0;
        for (double e : expected) sum += e;
        if (sum <= 0) return expected;
        double floor_logp = std::log(1e-12);
        for (size_t i = 0; i < cand.size(); ++i)
            logp[i] = expected[i] > 0 ? std::log(expected[i] / sum) : floor_logp;
        return expected;
    };

    // Alternate EM and pruning until only target_multi multi-cp pieces remain.
    std::vector<double> expected;
    while (true) {
        em_iteration();
        expected = em_iteration();
        int current_multi = static_cast<int>(cand.size()) - num_singles;
        if (current_multi <= target_multi) break;
        int keep = std::max(target_multi, (current_multi * 3) / 4);
        std::vector<std::pair<double, std::string>> ranked;
        for (size_t i = 0; i < cand.size(); ++i)
            if (!alphabet.count(cand[i])) ranked.emplace_back(expected[i], cand[i]);
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        std::set<std::string> keep_set;
        for (int i = 0; i < keep; ++i) keep_set.insert(ranked[static_cast<size_t>(i)].second);
        std::vector<std::string> next_cand;
        std::vector<double> next_logp;
        for (size_t i = 0; i < cand.size(); ++i) {
            if (alphabet.count(cand[i]) || keep_set.count(cand[i])) {
                next_cand.push_back(cand[i]);
                next_logp.push_back(logp[i]);
            }
        }
        cand = std::move(next_cand);
        logp = std::move(next_logp);
        reindex();
    }

    SubwordTokenizer t;
    t.options_ = options;
    std::vector<std::pair<double, std::string>> final_rank;
    for (size_t i = 0; i < cand.size(); ++i) final_rank.emplace_back(logp[i], cand[i]);
    std::sort(final_rank.begin(), final_rank.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (const auto& [lp, s] : final_rank) {
        t.pieces_.push_back(s);
        t.scores_.push_back(static_cast<float>(lp));
    }
    t.rebuild_index();
    return t;
}

}  // namespace memotion::text

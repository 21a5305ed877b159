#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "memotion/core/error.hpp"

namespace memotion::text {

using StopWords = std::unordered_set<std::string>;

// One token per line, UTF-8; '#'-prefixed lines are comments.
inline StopWords load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open stop-word list: " + path);
    StopWords words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        words.insert(line);
    }
    return words;
}

inline std::string ascii_lower(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// A token counts as a URL if it starts with "www." or contains "scheme://".
inline bool is_url_token(const std::string& tok) {
    if (tok.rfind("www.", 0) == 0) return true;
    auto pos = tok.find("://");
    if (pos == std::string::npos || pos == 0) return false;
    for (size_t i = 0; i < pos; ++i) {
        char c = tok[i];
        bool scheme_char = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' ||
                           c == '-' || c == '.';
        if (i == 0 && !(c >= 'a' && c <= 'z')) return false;
        if (!scheme_char) return false;
    }
    return true;
}

// Cleaning order: lowercase -> split on whitespace -> drop URL tokens and
// stop words -> rejoin with single spaces. Idempotent and total.
inline std::string clean_text(const std::string& raw, const StopWords& stopwords) {
    std::string lowered = ascii_lower(raw);
    std::istringstream ss(lowered);
    std::string tok;
    std::string out;
    while (ss >> tok) {
        if (is_url_token(tok)) continue;
        if (stopwords.count(tok)) continue;
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

inline std::vector<std::string> whitespace_tokens(const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> toks;
    std::string tok;
    while (ss >> tok) toks.push_back(tok);
    return toks;
}

}  // namespace memotion::text

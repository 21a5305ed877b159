#pragma once

#include <stdexcept>
#include <string>

namespace memotion {

// Bad user input: config files, CLI flags, malformed datasets in strict mode.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Bad data encountered while processing (missing files, undecodable images,
// unknown label strings).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Violated internal contract (shape mismatch, non-finite loss, ...).
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

inline void check(bool cond, const std::string& msg) {
    if (!cond) throw ModelError(msg);
}

}  // namespace memotion

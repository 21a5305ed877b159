#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace memotion {

// splitmix64 finalizer; used to derive independent stream seeds from
// (seed, epoch, step, ...) tuples so that every stochastic component is a
// pure function of the run seed.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    return mix64(mix64(mix64(seed ^ mix64(a)) ^ mix64(b)) ^ mix64(c));
}

class Rng {
public:
    explicit Rng(uint64_t seed = 0) : engine_(seed) {}

    void reseed(uint64_t seed) { engine_.seed(seed); }

    float uniform(float lo, float hi) {
        std::uniform_real_distribution<float> d(lo, hi);
        return d(engine_);
    }

    float normal(float mean = 0.0f, float stddev = 1.0f) {
        std::normal_distribution<float> d(mean, stddev);
        return d(engine_);
    }

    // Uniform integer in [0, n).
    int64_t index(int64_t n) {
        std::uniform_int_distribution<int64_t> d(0, n - 1);
        return d(engine_);
    }

    bool bernoulli(double p) {
        std::bernoulli_distribution d(p);
        return d(engine_);
    }

    std::vector<int> permutation(int n) {
        std::vector<int> p(static_cast<size_t>(n));
        std::iota(p.begin(), p.end(), 0);
        std::shuffle(p.begin(), p.end(), engine_);
        return p;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace memotion

#pragma once

#include <cstdint>
#include <vector>

namespace relevancy {

// splitmix64 step. Used everywhere a seed has to be stretched or mixed so
// that derived streams stay stable when unrelated parts of a run change.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent seed for stream `index` of a master seed. Adding
// more streams never perturbs earlier ones.
inline uint64_t derive_seed(uint64_t master, uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 1));
}

// Small deterministic generator. std::shuffle and the std distributions are
// not pinned by the standard, so token sampling and shuffles go through this
// to stay bit-identical across platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x2545f4914f6cdd1dULL)) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, bound) via rejection sampling.
    uint64_t next_below(uint64_t bound) {
        if (bound <= 1) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % bound;
    }

    // Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [-scale, +scale].
    double next_symmetric(double scale) {
        return (2.0 * next_double() - 1.0) * scale;
    }

    // Fisher-Yates, deterministic under this generator.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

}  // namespace relevancy

#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace fracbdsde {

// splitmix64 finalizer; mixes (seed, stream) into an independent 64-bit state.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

// Per-path Gaussian stream. Box-Muller over explicit mt19937_64 uniforms so
// ensembles are bit-reproducible across standard libraries (the distribution
// classes in <random> are not portable).
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) : eng_(mix_seed(seed, stream)) {}

    double uniform() {
        // (0,1), never exactly zero: take 53 high bits and offset by half an ulp.
        return ((eng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fracbdsde

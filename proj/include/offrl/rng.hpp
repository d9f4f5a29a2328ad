#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace offrl::rng {

// splitmix64 step; used to derive well-separated substream seeds from
// (base_seed, stream ids) so concurrent cells never share generator state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = a;
    std::uint64_t r = splitmix64(s);
    s ^= b * 0xD6E8FEB86659FD93ULL;
    r ^= splitmix64(s);
    s ^= c * 0xCA9B398DB4AE93ULL;
    r ^= splitmix64(s);
    return r;
}

// Seeded stream with explicit value transforms. std::mt19937_64 output is
// pinned by the standard; the distribution transforms below are ours, so a
// (seed) pair reproduces bit-identical samples on any conforming platform
// (std::uniform_real_distribution et al. are implementation-defined and
// deliberately avoided).
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : gen_(seed) {}
    Stream(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b = 0)
        : gen_(mix(seed, stream_a, stream_b)) {}

    std::uint64_t bits() { return gen_(); }

    // uniform on [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // standard normal via Box-Muller (deterministic transform)
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // exponential(1), used for Dirichlet rows
    double exponential() {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return -std::log(u);
    }

    // index sampled from a probability vector; residual mass goes to the
    // last index so the scan is total even under rounding
    int categorical(std::span<const double> probs) {
        if (probs.empty()) throw std::invalid_argument("categorical: empty probability vector");
        double u = uniform();
        double cum = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            cum += probs[i];
            if (u < cum) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace offrl::rng

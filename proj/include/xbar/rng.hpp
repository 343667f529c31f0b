#ifndef XBAR_RNG_HPP
#define XBAR_RNG_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>

namespace xbar {

// Substream k of master seed U is the seed U + k * kStreamStride (mod 2^64).
// Replica r of a run uses substream r; replica r of sweep cell c uses
// substream c * replicas + r. Every row of a sweep can therefore be replayed
// as a single run whose seed is the row's seed.
inline constexpr std::uint64_t kStreamStride = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix64(std::uint64_t &state) {
    std::uint64_t z = (state += kStreamStride);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return master + index * kStreamStride;
}

// Seeded stream used by every stochastic component. The engine is
// mt19937_64 keyed through seed_seq from splitmix64 output, and the derived
// draws below avoid the implementation-defined std distributions, so a seed
// reproduces the same stream on any conforming toolchain.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t state = seed;
        std::array<std::uint32_t, 8> words{};
        for (std::size_t k = 0; k < words.size(); k += 2) {
            const std::uint64_t v = splitmix64(state);
            words[k] = static_cast<std::uint32_t>(v);
            words[k + 1] = static_cast<std::uint32_t>(v >> 32);
        }
        std::seed_seq seq(words.begin(), words.end());
        engine_.seed(seq);
    }

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    std::uint64_t seed() const { return seed_; }

    // Uniform on [0, 1) with 53 bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform on {0, ..., n-1}; n > 0. Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(engine_()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    template <class RandomIt>
    void shuffle(RandomIt first, RandomIt last) {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            const auto j = below(i);
            using std::swap;
            swap(first[i - 1], first[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace xbar

#endif // XBAR_RNG_HPP

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

// Deterministic randomness. Every consumer gets a named substream derived
// from the single run seed, so adding or reordering stages never perturbs
// another stage's draws. The Gaussian uses the polar method on top of
// mt19937_64 (whose output sequence is pinned by the standard) so streams
// are reproducible across toolchains.

namespace comove {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

/// Deterministic random stream with uniform and Gaussian draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform draw in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal draw (Marsaglia polar method).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    std::vector<double> normal_vector(std::size_t n) {
        std::vector<double> out(n);
        for (auto& x : out) x = normal();
        return out;
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Derive the named substream of a run seed.
inline Rng substream(std::uint64_t seed, std::string_view name) {
    std::uint64_t state = seed ^ detail::fnv1a64(name);
    // Whiten so adjacent seeds and similar names give unrelated streams.
    std::uint64_t s = detail::splitmix64(state);
    s ^= detail::splitmix64(state);
    return Rng(s);
}

/// Derive a child seed for a consumer that manages its own substreams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
    std::uint64_t state = seed ^ detail::fnv1a64(name);
    std::uint64_t s = detail::splitmix64(state);
    s ^= detail::splitmix64(state);
    return s;
}

/// Derive an indexed substream (e.g. one per surrogate draw).
inline Rng substream(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    std::uint64_t state = seed ^ detail::fnv1a64(name);
    std::uint64_t s = detail::splitmix64(state);
    state += 0x632be59bd9b4e019ULL * (index + 1);
    s ^= detail::splitmix64(state);
    return Rng(s);
}

} // namespace comove

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace v2x {

/// Purposes for which independent random substreams are derived from one seed.
enum class Stream : std::uint64_t {
    Channel = 1,
    SolverInit = 2,
    WeightInit = 3,
    Shuffle = 4,
    Fuzz = 5,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Random source built on std::mt19937_64 (bit-exact across conforming
/// standard libraries). The distributions are implemented here rather than
/// via <random> so draws are reproducible across platforms, not just the
/// raw integer stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Substream `index` of `purpose` under `seed`. Streams for distinct
    /// (purpose, index) pairs are statistically independent and can be
    /// created in any order, which keeps parallel generation deterministic.
    static Rng substream(std::uint64_t seed, Stream purpose, std::uint64_t index) {
        std::uint64_t s = splitmix64(seed);
        s = splitmix64(s ^ (static_cast<std::uint64_t>(purpose) * 0xD1B54A32D192ED03ull));
        s = splitmix64(s ^ index);
        return Rng(s);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unit-mean exponential.
    double exponential() {
        // (0, 1]: avoids log(0)
        const double u = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
        return -std::log(u);
    }

    /// Standard normal (Box-Muller, one value per call).
    double normal() {
        const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n) by rejection; n > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

/// Fisher-Yates shuffle driven by Rng::below so orderings are portable.
template <typename Range>
void shuffle(Range& r, Rng& rng) {
    using std::swap;
    const auto n = static_cast<std::uint64_t>(std::size(r));
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = rng.below(i);
        swap(r[i - 1], r[j]);
    }
}

}  // namespace v2x

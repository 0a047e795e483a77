#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (key, counter), so any (realization, row, site) can be evaluated in any
// order or on any thread and still produce the same bits.

#include <array>
#include <cstdint>

namespace dpat {

// Philox4x32-10 (Salmon et al., Random123).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter apply(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            ctr = single_round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter single_round(const Counter& c, const Key& k) noexcept {
        const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Child seed for (master, point, realization). Stable across platforms.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point,
                                    std::uint64_t realization) noexcept {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ point);
    h = splitmix64(h ^ (realization * 0xD1342543DE82EF95ull));
    return h;
}

/// Uniform double in [0, 1) from 32 random bits.
constexpr double to_unit(std::uint32_t bits) noexcept {
    return static_cast<double>(bits) * 0x1.0p-32;
}

/// Uniforms addressed by (row, column). One Philox call covers four adjacent
/// columns, so a row of N sites costs ceil(N/4) block evaluations and every
/// site owns exactly one 32-bit draw.
class CounterStream {
public:
    using Block = std::array<std::uint32_t, 4>;

    constexpr CounterStream(std::uint64_t seed, std::uint32_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_{stream} {}

    constexpr std::uint64_t seed() const noexcept {
        return std::uint64_t{key_[0]} | (std::uint64_t{key_[1]} << 32);
    }
    constexpr std::uint32_t stream() const noexcept { return stream_; }

    /// Raw bits for columns 4*quad .. 4*quad+3 of `row`.
    constexpr Block block(std::uint32_t row, std::uint32_t quad) const noexcept {
        return Philox4x32::apply({quad, row, stream_, 0u}, key_);
    }

    constexpr double uniform(std::uint32_t row, std::uint32_t column) const noexcept {
        return to_unit(block(row, column / 4)[column % 4]);
    }

private:
    Philox4x32::Key key_;
    std::uint32_t stream_;
};

namespace streams {
inline constexpr std::uint32_t kAutomaton = 0;
inline constexpr std::uint32_t kBernoulli = 1;
inline constexpr std::uint32_t kParameters = 2;
}  // namespace streams

}  // namespace dpat

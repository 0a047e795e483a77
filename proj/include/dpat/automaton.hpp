#pragma once

// Replication automaton with parallel update on a ring of N sites.
//
//   center occupied            -> survives with probability p
//   center empty, k occupied   -> activated with probability 1 - (1-q)^k
//   neighbors (k = 0, 1, 2)
//
// Every site consumes exactly one uniform per step regardless of its
// probability, so the random layout never depends on the configuration.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpat/field.hpp"
#include "dpat/rng.hpp"

namespace dpat {

struct SimParams {
    std::uint32_t n_sites = 50;
    std::uint32_t n_steps = 1000;
    double p = 0.5;
    double q = 0.5;
    std::uint64_t seed = 0;
    double init_density = 0.5;

    std::uint32_t n_rows() const noexcept { return n_steps + 1; }

    void validate() const {
        auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
        if (n_sites < 3) throw std::invalid_argument("SimParams: n_sites must be >= 3");
        if (n_steps < 1) throw std::invalid_argument("SimParams: n_steps must be >= 1");
        if (!in_unit(p) || !in_unit(q)) throw std::invalid_argument("SimParams: p and q must lie in [0,1]");
        if (!in_unit(init_density)) throw std::invalid_argument("SimParams: init_density must lie in [0,1]");
    }

    friend bool operator==(const SimParams&, const SimParams&) = default;
};

constexpr double rule_prob(bool center, bool left, bool right, double p, double q) noexcept {
    if (center) return p;
    const int k = int{left} + int{right};
    if (k == 0) return 0.0;
    if (k == 1) return q;
    return q * (2.0 - q);
}

/// Activation probability indexed by (left << 2) | (center << 1) | right.
using RuleTable = std::array<double, 8>;

constexpr RuleTable make_rule_table(double p, double q) noexcept {
    RuleTable t{};
    for (unsigned idx = 0; idx < 8; ++idx) {
        t[idx] = rule_prob((idx >> 1) & 1u, (idx >> 2) & 1u, idx & 1u, p, q);
    }
    return t;
}

namespace detail {

inline bool bit_at(std::span<const std::uint8_t> row, std::uint32_t i) noexcept {
    return (row[i / 8] >> (i % 8)) & 1u;
}

inline void advance_row(std::span<const std::uint8_t> in, std::span<std::uint8_t> out,
                        std::uint32_t n, const RuleTable& table, const CounterStream& rng,
                        std::uint32_t out_row) noexcept {
    std::fill(out.begin(), out.end(), std::uint8_t{0});
    CounterStream::Block draws{};
    for (std::uint32_t i = 0; i < n; ++i) {
        if (i % 4 == 0) draws = rng.block(out_row, i / 4);
        const bool left = bit_at(in, i == 0 ? n - 1 : i - 1);
        const bool center = bit_at(in, i);
        const bool right = bit_at(in, i + 1 == n ? 0 : i + 1);
        const unsigned idx = (unsigned{left} << 2) | (unsigned{center} << 1) | unsigned{right};
        if (to_unit(draws[i % 4]) < table[idx]) {
            out[i / 8] = static_cast<std::uint8_t>(out[i / 8] | (1u << (i % 8)));
        }
    }
}

inline void bernoulli_row(std::span<std::uint8_t> out, std::uint32_t n, double density,
                          const CounterStream& rng, std::uint32_t row) noexcept {
    std::fill(out.begin(), out.end(), std::uint8_t{0});
    CounterStream::Block draws{};
    for (std::uint32_t i = 0; i < n; ++i) {
        if (i % 4 == 0) draws = rng.block(row, i / 4);
        if (to_unit(draws[i % 4]) < density) {
            out[i / 8] = static_cast<std::uint8_t>(out[i / 8] | (1u << (i % 8)));
        }
    }
}

}  // namespace detail

/// One synchronous update of a packed row. `rng` is the realization stream and
/// `out_row` the time index of the row being produced.
inline std::vector<std::uint8_t> step(std::span<const std::uint8_t> row, const SimParams& params,
                                      const CounterStream& rng, std::uint32_t out_row) {
    params.validate();
    if (row.size() != (params.n_sites + 7u) / 8u) {
        throw std::invalid_argument("step: row length does not match n_sites");
    }
    std::vector<std::uint8_t> out(row.size());
    detail::advance_row(row, out, params.n_sites, make_rule_table(params.p, params.q), rng, out_row);
    return out;
}

/// Full realization: T+1 rows, row 0 i.i.d. Bernoulli(init_density).
inline SpaceTimeField simulate(const SimParams& params) {
    params.validate();
    SpaceTimeField field{params.n_sites, params.n_rows()};
    const CounterStream rng{params.seed, streams::kAutomaton};
    const auto table = make_rule_table(params.p, params.q);
    detail::bernoulli_row(field.row(0), params.n_sites, params.init_density, rng, 0);
    for (std::uint32_t t = 0; t < params.n_steps; ++t) {
        const SpaceTimeField& src = field;
        detail::advance_row(src.row(t), field.row(t + 1), params.n_sites, table, rng, t + 1);
    }
    return field;
}

/// Smallest t whose row is empty, if any.
inline std::optional<std::uint32_t> extinction_time(const SpaceTimeField& field) {
    for (std::uint32_t t = 0; t < field.n_rows(); ++t) {
        if (field.row_empty(t)) return t;
    }
    return std::nullopt;
}

/// Isotropic control: every cell i.i.d. Bernoulli(p_b), no dynamics.
inline SpaceTimeField bernoulli_field(std::uint32_t n_sites, std::uint32_t n_rows, double p_b,
                                      std::uint64_t seed) {
    if (!(p_b >= 0.0 && p_b <= 1.0)) throw std::invalid_argument("bernoulli_field: p_b must lie in [0,1]");
    SpaceTimeField field{n_sites, n_rows};
    const CounterStream rng{seed, streams::kBernoulli};
    for (std::uint32_t t = 0; t < n_rows; ++t) detail::bernoulli_row(field.row(t), n_sites, p_b, rng, t);
    return field;
}

/// Cells occupied at t+1 with no occupied parent among {i-1, i, i+1} at t.
inline std::size_t count_spontaneous_creations(const SpaceTimeField& field) {
    std::size_t bad = 0;
    const std::int64_t n = field.n_sites();
    for (std::uint32_t t = 0; t + 1 < field.n_rows(); ++t) {
        for (std::int64_t i = 0; i < n; ++i) {
            if (field.get(static_cast<std::uint32_t>(i), t + 1) && !field.get_wrapped(i - 1, t) &&
                !field.get_wrapped(i, t) && !field.get_wrapped(i + 1, t)) {
                ++bad;
            }
        }
    }
    return bad;
}

}  // namespace dpat

#pragma once

// Hidden percolation patterns.
//
// A pattern is a spanning cluster on a renormalized lattice: each block of
// the original field becomes one renormalized site, active when its bit
// pattern satisfies the scheme's predicate. Clusters are built with union-find
// under the scheme's adjacency; a pattern spans when one cluster touches both
// the first and the last renormalized time row.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpat/field.hpp"
#include "dpat/union_find.hpp"

namespace dpat {

enum class PatternKind : std::uint8_t { A = 0, PL = 1, Qplus = 2, Dplus = 3, Q = 4, D = 5 };

inline constexpr std::size_t kPatternCount = 6;
inline constexpr std::array<PatternKind, kPatternCount> kCanonicalOrder{
    PatternKind::A, PatternKind::PL, PatternKind::Qplus,
    PatternKind::Dplus, PatternKind::Q, PatternKind::D};

constexpr std::size_t index_of(PatternKind k) noexcept { return static_cast<std::size_t>(k); }

constexpr std::string_view pattern_name(PatternKind k) noexcept {
    constexpr std::array<std::string_view, kPatternCount> names{"A", "PL", "Qplus", "Dplus", "Q", "D"};
    return names[index_of(k)];
}

inline std::optional<PatternKind> parse_pattern(std::string_view name) noexcept {
    for (auto k : kCanonicalOrder) {
        if (pattern_name(k) == name) return k;
    }
    if (name == "Q+") return PatternKind::Qplus;
    if (name == "D+") return PatternKind::Dplus;
    return std::nullopt;
}

/// Six flags in canonical order [A, PL, Q+, D+, Q, D]. Percolating is NOT A.
struct MultiHotTarget {
    std::array<bool, kPatternCount> flags{};

    bool operator[](PatternKind k) const noexcept { return flags[index_of(k)]; }
    bool& operator[](PatternKind k) noexcept { return flags[index_of(k)]; }

    bool percolating() const noexcept { return !flags[0]; }

    /// Bit k holds canonical pattern k.
    std::uint8_t mask() const noexcept {
        std::uint8_t m = 0;
        for (std::size_t k = 0; k < kPatternCount; ++k) {
            if (flags[k]) m = static_cast<std::uint8_t>(m | (1u << k));
        }
        return m;
    }

    static MultiHotTarget from_mask(std::uint8_t m) {
        if (m & 0xC0u) throw std::invalid_argument("MultiHotTarget: bits 6-7 must be zero");
        if ((m & 1u) && (m & 0x3Eu)) {
            throw std::invalid_argument("MultiHotTarget: absorbing target with pattern bits set");
        }
        MultiHotTarget t;
        for (std::size_t k = 0; k < kPatternCount; ++k) t.flags[k] = (m >> k) & 1u;
        return t;
    }

    /// A excludes every pattern; D implies D+; Q implies Q+.
    bool consistent() const noexcept {
        using K = PatternKind;
        const auto& s = *this;
        if (s[K::A] && (s[K::PL] || s[K::Qplus] || s[K::Dplus] || s[K::Q] || s[K::D])) return false;
        if (s[K::D] && !s[K::Dplus]) return false;
        if (s[K::Q] && !s[K::Qplus]) return false;
        return true;
    }

    std::string to_string() const {
        std::string s = "[";
        for (std::size_t k = 0; k < kPatternCount; ++k) {
            if (k) s += ',';
            s += flags[k] ? '1' : '0';
        }
        return s + "]";
    }

    friend bool operator==(const MultiHotTarget&, const MultiHotTarget&) = default;
};

/// Renormalized-lattice offset: `ds` along space, `dt` along time.
struct Offset {
    int ds = 0;
    int dt = 0;
    friend bool operator==(const Offset&, const Offset&) = default;
};

inline const std::vector<Offset>& nearest_offsets() {
    static const std::vector<Offset> v{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    return v;
}

inline const std::vector<Offset>& next_nearest_offsets() {
    static const std::vector<Offset> v{{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                       {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
    return v;
}

/// Block geometry, activity predicate and renormalized adjacency for one
/// pattern. Block cell (c, r) (space offset c, time offset r) is bit r*w + c
/// of the block code; `active[code]` is the predicate.
struct RenormScheme {
    std::uint32_t block_width = 1;
    std::uint32_t block_height = 1;
    std::uint32_t stride_space = 1;
    std::uint32_t stride_time = 1;
    std::vector<bool> active;
    std::vector<Offset> adjacency;

    std::uint32_t block_cells() const noexcept { return block_width * block_height; }

    void validate() const {
        if (block_width == 0 || block_height == 0) throw std::invalid_argument("RenormScheme: empty block");
        if (block_cells() > 16) throw std::invalid_argument("RenormScheme: block larger than 16 cells");
        if (stride_space == 0 || stride_time == 0) throw std::invalid_argument("RenormScheme: stride must be >= 1");
        if (active.size() != (std::size_t{1} << block_cells())) {
            throw std::invalid_argument("RenormScheme: predicate must cover every block pattern");
        }
        for (const auto& o : adjacency) {
            if (o.ds == 0 && o.dt == 0) throw std::invalid_argument("RenormScheme: zero adjacency offset");
            bool mirrored = false;
            for (const auto& m : adjacency) mirrored = mirrored || (m.ds == -o.ds && m.dt == -o.dt);
            if (!mirrored) throw std::invalid_argument("RenormScheme: adjacency must be symmetric");
        }
    }

    /// Block code from a bit-string such as "1001" (character k = bit k).
    static std::uint32_t code_from_string(std::string_view bits, std::uint32_t cells) {
        if (bits.size() != cells) throw std::invalid_argument("block pattern has wrong length");
        std::uint32_t code = 0;
        for (std::uint32_t k = 0; k < cells; ++k) {
            if (bits[k] == '1') code |= 1u << k;
            else if (bits[k] != '0') throw std::invalid_argument("block pattern must be 0/1");
        }
        return code;
    }

    static std::string code_to_string(std::uint32_t code, std::uint32_t cells) {
        std::string s(cells, '0');
        for (std::uint32_t k = 0; k < cells; ++k) {
            if ((code >> k) & 1u) s[k] = '1';
        }
        return s;
    }

    friend bool operator==(const RenormScheme&, const RenormScheme&) = default;
};

/// Grid of renormalized sites, `width` along space and `height` along time.
struct RenormField {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    bool periodic = false;
    std::vector<Offset> adjacency;
    std::vector<std::uint8_t> cells;
    std::uint32_t source_sites = 0;
    std::uint32_t source_rows = 0;

    bool get(std::uint32_t i, std::uint32_t j) const noexcept { return cells[std::size_t{j} * width + i] != 0; }
    void set(std::uint32_t i, std::uint32_t j, bool v) noexcept { cells[std::size_t{j} * width + i] = v ? 1 : 0; }
};

namespace detail {

inline std::vector<bool> predicate_from(std::uint32_t cells, bool (*pred)(std::uint32_t code, std::uint32_t cells)) {
    std::vector<bool> out(std::size_t{1} << cells);
    for (std::uint32_t code = 0; code < out.size(); ++code) out[code] = pred(code, cells);
    return out;
}

}  // namespace detail

/// Default conventions:
///   D, D+   2x1 spatial pair, exactly one site occupied
///   Q, Q+   2x2 block, occupied sites form a diagonal pair (1001 or 0110)
///   PL      2x2 block, at least three sites occupied
/// Base kinds connect nearest renormalized neighbors; "+" kinds add the four
/// diagonals. Blocks are disjoint (stride equals block size).
inline RenormScheme builtin_scheme(PatternKind kind) {
    RenormScheme s;
    switch (kind) {
        case PatternKind::A:
            throw std::invalid_argument("builtin_scheme: A is decided by site survival, not renormalization");
        case PatternKind::D:
        case PatternKind::Dplus:
            s.block_width = 2;
            s.block_height = 1;
            s.active = detail::predicate_from(2, [](std::uint32_t code, std::uint32_t) {
                return __builtin_popcount(code) == 1;
            });
            break;
        case PatternKind::Q:
        case PatternKind::Qplus:
            s.block_width = 2;
            s.block_height = 2;
            s.active = detail::predicate_from(4, [](std::uint32_t code, std::uint32_t) {
                return code == 0b1001u || code == 0b0110u;
            });
            break;
        case PatternKind::PL:
            s.block_width = 2;
            s.block_height = 2;
            s.active = detail::predicate_from(4, [](std::uint32_t code, std::uint32_t) {
                return __builtin_popcount(code) >= 3;
            });
            break;
    }
    s.stride_space = s.block_width;
    s.stride_time = s.block_height;
    const bool plus = kind == PatternKind::Dplus || kind == PatternKind::Qplus;
    s.adjacency = plus ? next_nearest_offsets() : nearest_offsets();
    return s;
}

/// 1x1 occupied-site scheme. Adjacency is the undirected closure of the
/// automaton's parent relation (same, left or right column one row apart).
inline RenormScheme site_scheme() {
    RenormScheme s;
    s.active = {false, true};
    s.adjacency = {{-1, 1}, {0, 1}, {1, 1}, {-1, -1}, {0, -1}, {1, -1}};
    return s;
}

namespace detail {

/// One byte per cell, row-major; avoids repeated bit extraction when several
/// schemes read the same field.
inline std::vector<std::uint8_t> unpack(const SpaceTimeField& field) {
    const std::uint32_t n = field.n_sites();
    std::vector<std::uint8_t> cells(std::size_t{n} * field.n_rows());
    for (std::uint32_t t = 0; t < field.n_rows(); ++t) {
        const auto row = field.row(t);
        std::uint8_t* dst = cells.data() + std::size_t{t} * n;
        for (std::uint32_t i = 0; i < n; ++i) dst[i] = (row[i / 8] >> (i % 8)) & 1u;
    }
    return cells;
}

inline RenormField renormalize_cells(const std::uint8_t* cells, std::uint32_t n, std::uint32_t rows,
                                     const RenormScheme& scheme) {
    scheme.validate();
    if (n < scheme.block_width || rows < scheme.block_height) {
        throw std::invalid_argument("renormalize: field smaller than one block");
    }
    RenormField rf;
    rf.periodic = n % scheme.stride_space == 0;
    rf.width = rf.periodic ? n / scheme.stride_space : (n - scheme.block_width) / scheme.stride_space + 1;
    rf.height = (rows - scheme.block_height) / scheme.stride_time + 1;
    rf.adjacency = scheme.adjacency;
    rf.source_sites = n;
    rf.source_rows = rows;
    rf.cells.assign(std::size_t{rf.width} * rf.height, 0);

    const std::vector<std::uint8_t> lut(scheme.active.begin(), scheme.active.end());
    const std::uint32_t w = scheme.block_width;
    const std::uint32_t h = scheme.block_height;
    std::vector<std::uint32_t> columns(std::size_t{rf.width} * w);
    for (std::uint32_t i = 0; i < rf.width; ++i) {
        for (std::uint32_t c = 0; c < w; ++c) columns[std::size_t{i} * w + c] = (i * scheme.stride_space + c) % n;
    }
    for (std::uint32_t j = 0; j < rf.height; ++j) {
        const std::uint8_t* base = cells + std::size_t{j} * scheme.stride_time * n;
        std::uint8_t* out = rf.cells.data() + std::size_t{j} * rf.width;
        for (std::uint32_t i = 0; i < rf.width; ++i) {
            const std::uint32_t* col = columns.data() + std::size_t{i} * w;
            std::uint32_t code = 0;
            for (std::uint32_t r = 0; r < h; ++r) {
                const std::uint8_t* line = base + std::size_t{r} * n;
                for (std::uint32_t c = 0; c < w; ++c) code |= std::uint32_t{line[col[c]]} << (r * w + c);
            }
            out[i] = lut[code];
        }
    }
    return rf;
}

}  // namespace detail

/// Cell (I, J) is the predicate on the block anchored at space I*stride_space
/// (wrapping around when the stride divides N) and time J*stride_time.
inline RenormField renormalize(const SpaceTimeField& field, const RenormScheme& scheme) {
    const auto cells = detail::unpack(field);
    return detail::renormalize_cells(cells.data(), field.n_sites(), field.n_rows(), scheme);
}

/// True when one cluster of active sites touches both the first and the last
/// time row. `spatial_periodic` wraps space offsets around the grid width.
inline bool spanning(const RenormField& rf, bool spatial_periodic) {
    const std::uint32_t w = rf.width;
    const std::uint32_t h = rf.height;
    if (w == 0 || h == 0) return false;
    const std::uint8_t* first = rf.cells.data();
    const std::uint8_t* last = rf.cells.data() + std::size_t{h - 1} * w;
    const bool any_first = std::any_of(first, first + w, [](std::uint8_t c) { return c != 0; });
    const bool any_last = std::any_of(last, last + w, [](std::uint8_t c) { return c != 0; });
    if (!any_first || !any_last) return false;
    if (h == 1) return true;

    // Only half of the (symmetric) offsets are needed to visit every edge.
    std::vector<Offset> forward;
    for (const auto& o : rf.adjacency) {
        if (o.dt > 0 || (o.dt == 0 && o.ds > 0)) forward.push_back(o);
    }
    const auto iw = static_cast<std::int64_t>(w);
    UnionFind uf{std::size_t{w} * h};
    for (std::uint32_t j = 0; j < h; ++j) {
        const std::uint8_t* row = rf.cells.data() + std::size_t{j} * w;
        for (const auto& o : forward) {
            const std::int64_t jj = std::int64_t{j} + o.dt;
            if (jj < 0 || jj >= h) continue;
            const std::uint8_t* other = rf.cells.data() + static_cast<std::size_t>(jj) * w;
            // Reduce once per offset; |ds| may exceed the width on tiny grids.
            const std::int64_t shift = ((o.ds % iw) + iw) % iw;
            for (std::uint32_t i = 0; i < w; ++i) {
                if (!row[i]) continue;
                std::int64_t ii = std::int64_t{i} + o.ds;
                if (spatial_periodic) {
                    ii = std::int64_t{i} + shift;
                    if (ii >= iw) ii -= iw;
                } else if (ii < 0 || ii >= iw) {
                    continue;
                }
                if (other[ii]) {
                    uf.unite(j * w + i, static_cast<std::uint32_t>(jj * iw + ii));
                }
            }
        }
    }
    std::vector<std::uint8_t> touches_top(std::size_t{w} * h, 0);
    for (std::uint32_t i = 0; i < w; ++i) {
        if (first[i]) touches_top[uf.find(i)] = 1;
    }
    for (std::uint32_t i = 0; i < w; ++i) {
        if (last[i] && touches_top[uf.find((h - 1) * w + i)]) return true;
    }
    return false;
}

inline bool spanning(const RenormField& rf) { return spanning(rf, rf.periodic); }

/// Survival to the final row. For automaton fields (no spontaneous creation)
/// this is equivalent to a directed occupied path from row 0 to row T.
inline bool site_percolates(const SpaceTimeField& field) {
    return !field.row_empty(field.n_rows() - 1);
}

/// Schemes for the five renormalized patterns, indexed by canonical kind.
struct PatternSchemes {
    std::array<RenormScheme, kPatternCount> by_kind;

    const RenormScheme& operator[](PatternKind k) const { return by_kind[index_of(k)]; }
    RenormScheme& operator[](PatternKind k) { return by_kind[index_of(k)]; }

    static PatternSchemes builtin() {
        PatternSchemes s;
        for (auto k : kCanonicalOrder) {
            if (k != PatternKind::A) s[k] = builtin_scheme(k);
        }
        return s;
    }
};

inline MultiHotTarget label_field(const SpaceTimeField& field, const PatternSchemes& schemes) {
    MultiHotTarget t;
    t[PatternKind::A] = !site_percolates(field);
    if (t[PatternKind::A]) return t;
    const auto cells = detail::unpack(field);
    for (auto k : kCanonicalOrder) {
        if (k == PatternKind::A) continue;
        t[k] = spanning(detail::renormalize_cells(cells.data(), field.n_sites(), field.n_rows(), schemes[k]));
    }
    return t;
}

inline MultiHotTarget label_field(const SpaceTimeField& field) {
    static const PatternSchemes defaults = PatternSchemes::builtin();
    return label_field(field, defaults);
}

/// Pattern flags for fields without automaton structure (Bernoulli controls):
/// survival is replaced by spanning on the site scheme.
inline MultiHotTarget label_isotropic(const SpaceTimeField& field, const PatternSchemes& schemes) {
    MultiHotTarget t;
    const auto cells = detail::unpack(field);
    auto span_with = [&](const RenormScheme& s) {
        return spanning(detail::renormalize_cells(cells.data(), field.n_sites(), field.n_rows(), s));
    };
    t[PatternKind::A] = !span_with(site_scheme());
    for (auto k : kCanonicalOrder) {
        if (k != PatternKind::A) t[k] = span_with(schemes[k]);
    }
    return t;
}

}  // namespace dpat

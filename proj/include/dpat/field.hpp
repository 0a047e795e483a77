#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpat {

/// Boolean lattice with `n_sites` columns (periodic in space) and `n_rows`
/// time rows. Storage is row-major; site i of a row lives in byte i/8 at bit
/// i%8 (LSB first) and each row is padded to a whole byte with zero bits.
class SpaceTimeField {
public:
    SpaceTimeField() = default;

    SpaceTimeField(std::uint32_t n_sites, std::uint32_t n_rows)
        : n_sites_{n_sites}, n_rows_{n_rows}, stride_{(n_sites + 7u) / 8u},
          bytes_(std::size_t{stride_} * n_rows, 0) {
        if (n_sites == 0 || n_rows == 0) {
            throw std::invalid_argument("SpaceTimeField: dimensions must be positive");
        }
    }

    /// Takes ownership of packed bytes; pad bits must already be zero.
    static SpaceTimeField from_packed(std::uint32_t n_sites, std::uint32_t n_rows,
                                      std::vector<std::uint8_t> bytes) {
        SpaceTimeField f{n_sites, n_rows};
        if (bytes.size() != f.bytes_.size()) {
            throw std::invalid_argument("SpaceTimeField: packed size mismatch");
        }
        f.bytes_ = std::move(bytes);
        return f;
    }

    std::uint32_t n_sites() const noexcept { return n_sites_; }
    std::uint32_t n_rows() const noexcept { return n_rows_; }
    std::size_t row_bytes() const noexcept { return stride_; }

    bool get(std::uint32_t site, std::uint32_t row) const noexcept {
        return (bytes_[std::size_t{row} * stride_ + site / 8] >> (site % 8)) & 1u;
    }

    void set(std::uint32_t site, std::uint32_t row, bool value) noexcept {
        auto& b = bytes_[std::size_t{row} * stride_ + site / 8];
        const auto mask = static_cast<std::uint8_t>(1u << (site % 8));
        b = value ? static_cast<std::uint8_t>(b | mask) : static_cast<std::uint8_t>(b & ~mask);
    }

    /// Periodic column lookup; `site` may be any integer.
    bool get_wrapped(std::int64_t site, std::uint32_t row) const noexcept {
        const std::int64_t n = n_sites_;
        return get(static_cast<std::uint32_t>(((site % n) + n) % n), row);
    }

    std::span<const std::uint8_t> row(std::uint32_t t) const noexcept {
        return {bytes_.data() + std::size_t{t} * stride_, stride_};
    }
    std::span<std::uint8_t> row(std::uint32_t t) noexcept {
        return {bytes_.data() + std::size_t{t} * stride_, stride_};
    }

    std::span<const std::uint8_t> packed() const noexcept { return bytes_; }

    bool row_empty(std::uint32_t t) const noexcept {
        const auto r = row(t);
        return std::all_of(r.begin(), r.end(), [](std::uint8_t b) { return b == 0; });
    }

    std::size_t row_count(std::uint32_t t) const noexcept {
        std::size_t c = 0;
        for (auto b : row(t)) c += static_cast<std::size_t>(__builtin_popcount(b));
        return c;
    }

    std::size_t occupied() const noexcept {
        std::size_t c = 0;
        for (auto b : bytes_) c += static_cast<std::size_t>(__builtin_popcount(b));
        return c;
    }

    std::uint8_t pad_mask() const noexcept {
        const unsigned used = n_sites_ % 8;
        return used == 0 ? std::uint8_t{0} : static_cast<std::uint8_t>(0xFFu << used);
    }

    bool pad_bits_clear() const noexcept {
        const auto mask = pad_mask();
        if (mask == 0) return true;
        for (std::uint32_t t = 0; t < n_rows_; ++t) {
            if (row(t).back() & mask) return false;
        }
        return true;
    }

    void fill(bool value) noexcept {
        std::fill(bytes_.begin(), bytes_.end(), value ? std::uint8_t{0xFF} : std::uint8_t{0});
        if (value) {
            const auto mask = pad_mask();
            for (std::uint32_t t = 0; t < n_rows_; ++t) row(t).back() &= static_cast<std::uint8_t>(~mask);
        }
    }

    /// One character per site, '1' occupied, rows separated by '\n'.
    std::string to_text() const {
        std::string s;
        s.reserve(std::size_t{n_rows_} * (n_sites_ + 1));
        for (std::uint32_t t = 0; t < n_rows_; ++t) {
            for (std::uint32_t i = 0; i < n_sites_; ++i) s.push_back(get(i, t) ? '1' : '0');
            s.push_back('\n');
        }
        return s;
    }

    friend bool operator==(const SpaceTimeField&, const SpaceTimeField&) = default;

private:
    std::uint32_t n_sites_ = 0;
    std::uint32_t n_rows_ = 0;
    std::uint32_t stride_ = 0;
    std::vector<std::uint8_t> bytes_;
};

/// Builds a field from rows of '0'/'1' characters (all rows equal length).
inline SpaceTimeField field_from_rows(const std::vector<std::string>& rows) {
    if (rows.empty() || rows.front().empty()) {
        throw std::invalid_argument("field_from_rows: empty input");
    }
    SpaceTimeField f{static_cast<std::uint32_t>(rows.front().size()),
                     static_cast<std::uint32_t>(rows.size())};
    for (std::uint32_t t = 0; t < rows.size(); ++t) {
        if (rows[t].size() != f.n_sites()) {
            throw std::invalid_argument("field_from_rows: ragged rows");
        }
        for (std::uint32_t i = 0; i < f.n_sites(); ++i) {
            const char c = rows[t][i];
            if (c != '0' && c != '1') throw std::invalid_argument("field_from_rows: expected 0/1");
            f.set(i, t, c == '1');
        }
    }
    return f;
}

}  // namespace dpat

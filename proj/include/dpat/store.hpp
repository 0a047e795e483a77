#pragma once

// Indexed record store for labeled fields.
//
// Data file:   "DPDS" <version=1> record*
// Index file:  "DPIX" <version=1> (offset:u64 length:u64)*
// Record:      40-byte header followed by the payload (the field's packed
//              rows, raw DEFLATE when flag bit 0 is set).
//
// Header layout (little-endian):
//   0  u32 n_sites      4  u32 n_rows       8  f64 p        16 f64 q
//   24 u64 seed         32 u8  target       33 u8  flags    34 u16 reserved
//   36 u32 payload_len
//
// Offsets count from the first byte after the 5-byte data preamble, so the
// first record of a file sits at offset 0.

#include <zlib.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpat/automaton.hpp"
#include "dpat/field.hpp"
#include "dpat/patterns.hpp"

namespace dpat {

/// Malformed or unreadable dataset content.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::array<char, 4> kDataMagic{'D', 'P', 'D', 'S'};
inline constexpr std::array<char, 4> kIndexMagic{'D', 'P', 'I', 'X'};
inline constexpr std::uint8_t kFormatVersion = 1;
inline constexpr std::size_t kPreambleSize = 5;
inline constexpr std::size_t kRecordHeaderSize = 40;
inline constexpr std::size_t kIndexEntrySize = 16;
inline constexpr std::uint8_t kFlagDeflate = 0x01;

namespace le {

inline void put_u16(std::uint8_t* p, std::uint16_t v) {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
}
inline void put_u32(std::uint8_t* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
inline void put_u64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
inline std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{p[i]} << (8 * i);
    return v;
}
inline std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
    return v;
}

}  // namespace le

struct RecordHeader {
    std::uint32_t n_sites = 0;
    std::uint32_t n_rows = 0;
    double p = 0.0;
    double q = 0.0;
    std::uint64_t seed = 0;
    std::uint8_t target = 0;
    std::uint8_t flags = 0;
    std::uint16_t reserved = 0;
    std::uint32_t payload_len = 0;

    std::array<std::uint8_t, kRecordHeaderSize> encode() const {
        std::array<std::uint8_t, kRecordHeaderSize> b{};
        le::put_u32(&b[0], n_sites);
        le::put_u32(&b[4], n_rows);
        le::put_u64(&b[8], std::bit_cast<std::uint64_t>(p));
        le::put_u64(&b[16], std::bit_cast<std::uint64_t>(q));
        le::put_u64(&b[24], seed);
        b[32] = target;
        b[33] = flags;
        le::put_u16(&b[34], reserved);
        le::put_u32(&b[36], payload_len);
        return b;
    }

    static RecordHeader decode(std::span<const std::uint8_t, kRecordHeaderSize> b) {
        RecordHeader h;
        h.n_sites = le::get_u32(&b[0]);
        h.n_rows = le::get_u32(&b[4]);
        h.p = std::bit_cast<double>(le::get_u64(&b[8]));
        h.q = std::bit_cast<double>(le::get_u64(&b[16]));
        h.seed = le::get_u64(&b[24]);
        h.target = b[32];
        h.flags = b[33];
        h.reserved = le::get_u16(&b[34]);
        h.payload_len = le::get_u32(&b[36]);
        return h;
    }

    void validate() const {
        if (n_sites == 0 || n_rows == 0) throw DataError("corrupt record: zero field dimension");
        if (reserved != 0) throw DataError("corrupt record: reserved bytes are not zero");
        if (flags & ~kFlagDeflate) throw DataError("corrupt record: unknown flag bits");
        if (target & 0xC0u) throw DataError("corrupt record: target bits 6-7 set");
        if ((target & 1u) && (target & 0x3Eu)) throw DataError("corrupt record: absorbing target with pattern bits");
    }

    std::size_t raw_payload_size() const noexcept {
        return std::size_t{(n_sites + 7u) / 8u} * n_rows;
    }
};

struct IndexEntry {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
    friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

using DatasetIndex = std::vector<IndexEntry>;

struct Record {
    SpaceTimeField field;
    SimParams params;
    MultiHotTarget target;
};

namespace detail {

inline std::vector<std::uint8_t> deflate_raw(std::span<const std::uint8_t> in) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_BEST_SPEED, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        throw std::runtime_error("deflateInit2 failed");
    }
    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(in.size())));
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    const auto produced = zs.total_out;
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw std::runtime_error("deflate failed");
    out.resize(produced);
    return out;
}

inline std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> in, std::size_t expected) {
    z_stream zs{};
    if (inflateInit2(&zs, -15) != Z_OK) throw DataError("inflateInit2 failed");
    std::vector<std::uint8_t> out(expected);
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const auto produced = zs.total_out;
    const auto leftover = zs.avail_in;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != expected || leftover != 0) {
        throw DataError("corrupt record: decompression failed");
    }
    return out;
}

inline void check_preamble(std::istream& in, const std::array<char, 4>& magic, const std::string& what) {
    std::array<char, kPreambleSize> pre{};
    if (!in.read(pre.data(), pre.size())) throw DataError(what + ": missing preamble");
    if (!std::equal(magic.begin(), magic.end(), pre.begin())) throw DataError(what + ": bad magic");
    if (static_cast<std::uint8_t>(pre[4]) != kFormatVersion) throw DataError(what + ": unsupported version");
}

inline void write_preamble(std::ostream& out, const std::array<char, 4>& magic) {
    out.write(magic.data(), magic.size());
    out.put(static_cast<char>(kFormatVersion));
}

inline void write_entry(std::ostream& out, const IndexEntry& e) {
    std::array<std::uint8_t, kIndexEntrySize> b{};
    le::put_u64(&b[0], e.offset);
    le::put_u64(&b[8], e.length);
    out.write(reinterpret_cast<const char*>(b.data()), b.size());
}

}  // namespace detail

/// Single-writer appender for a data file and its sidecar index.
class DatasetWriter {
public:
    DatasetWriter(const std::filesystem::path& data_path, const std::filesystem::path& index_path,
                  bool compress = true)
        : data_{data_path, std::ios::binary | std::ios::trunc},
          index_{index_path, std::ios::binary | std::ios::trunc}, compress_{compress} {
        if (!data_) throw DataError("cannot create data file " + data_path.string());
        if (!index_) throw DataError("cannot create index file " + index_path.string());
        detail::write_preamble(data_, kDataMagic);
        detail::write_preamble(index_, kIndexMagic);
        check_streams();
    }

    IndexEntry append(const SpaceTimeField& field, const SimParams& params, const MultiHotTarget& target) {
        if (!target.consistent()) throw std::invalid_argument("append: inconsistent target");
        RecordHeader h;
        h.n_sites = field.n_sites();
        h.n_rows = field.n_rows();
        h.p = params.p;
        h.q = params.q;
        h.seed = params.seed;
        h.target = target.mask();
        std::vector<std::uint8_t> compressed;
        std::span<const std::uint8_t> payload = field.packed();
        if (compress_) {
            compressed = detail::deflate_raw(payload);
            payload = compressed;
            h.flags = kFlagDeflate;
        }
        if (payload.size() > std::numeric_limits<std::uint32_t>::max()) {
            throw DataError("append: payload exceeds 2^32-1 bytes");
        }
        h.payload_len = static_cast<std::uint32_t>(payload.size());
        const auto hdr = h.encode();
        data_.write(reinterpret_cast<const char*>(hdr.data()), hdr.size());
        data_.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
        const IndexEntry e{cursor_, kRecordHeaderSize + payload.size()};
        detail::write_entry(index_, e);
        check_streams();
        cursor_ += e.length;
        entries_.push_back(e);
        return e;
    }

    void flush() {
        data_.flush();
        index_.flush();
        check_streams();
    }

    const DatasetIndex& index() const noexcept { return entries_; }

private:
    void check_streams() const {
        if (!data_ || !index_) throw DataError("storage write failure");
    }

    std::ofstream data_;
    std::ofstream index_;
    bool compress_;
    std::uint64_t cursor_ = 0;
    DatasetIndex entries_;
};

/// Random-access reader over a data file.
class DatasetReader {
public:
    explicit DatasetReader(const std::filesystem::path& data_path) : path_{data_path}, in_{data_path, std::ios::binary} {
        if (!in_) throw DataError("cannot open data file " + data_path.string());
        detail::check_preamble(in_, kDataMagic, "data file");
        in_.seekg(0, std::ios::end);
        size_ = static_cast<std::uint64_t>(in_.tellg()) - kPreambleSize;
    }

    /// Bytes available after the preamble.
    std::uint64_t records_size() const noexcept { return size_; }

    RecordHeader read_header(std::uint64_t offset) {
        if (offset + kRecordHeaderSize > size_) throw DataError("corrupt record: truncated header");
        std::array<std::uint8_t, kRecordHeaderSize> b{};
        seek(offset);
        if (!in_.read(reinterpret_cast<char*>(b.data()), b.size())) throw DataError("corrupt record: truncated header");
        auto h = RecordHeader::decode(b);
        h.validate();
        return h;
    }

    Record read(const IndexEntry& entry) {
        const auto h = read_header(entry.offset);
        if (entry.length != kRecordHeaderSize + std::uint64_t{h.payload_len}) {
            throw DataError("corrupt record: index length does not match header");
        }
        if (entry.offset + entry.length > size_) throw DataError("corrupt record: truncated payload");
        std::vector<std::uint8_t> payload(h.payload_len);
        if (!in_.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()))) {
            throw DataError("corrupt record: truncated payload");
        }
        const std::size_t raw = h.raw_payload_size();
        if (h.flags & kFlagDeflate) {
            payload = detail::inflate_raw(payload, raw);
        } else if (payload.size() != raw) {
            throw DataError("corrupt record: payload size does not match dimensions");
        }
        Record r;
        r.field = SpaceTimeField::from_packed(h.n_sites, h.n_rows, std::move(payload));
        if (!r.field.pad_bits_clear()) throw DataError("corrupt record: nonzero pad bits");
        r.params.n_sites = h.n_sites;
        r.params.n_steps = h.n_rows - 1;
        r.params.p = h.p;
        r.params.q = h.q;
        r.params.seed = h.seed;
        r.target = MultiHotTarget::from_mask(h.target);
        return r;
    }

    /// Walks the record stream from offset 0 using the headers alone.
    DatasetIndex scan_index() {
        DatasetIndex idx;
        std::uint64_t off = 0;
        while (off < size_) {
            const auto h = read_header(off);
            const std::uint64_t len = kRecordHeaderSize + std::uint64_t{h.payload_len};
            if (off + len > size_) throw DataError("corrupt record: truncated payload");
            idx.push_back({off, len});
            off += len;
        }
        return idx;
    }

private:
    void seek(std::uint64_t offset) {
        in_.clear();
        in_.seekg(static_cast<std::streamoff>(kPreambleSize + offset));
    }

    std::filesystem::path path_;
    std::ifstream in_;
    std::uint64_t size_ = 0;
};

inline Record read_record(const std::filesystem::path& data_path, const IndexEntry& entry) {
    DatasetReader reader{data_path};
    return reader.read(entry);
}

inline DatasetIndex read_index(const std::filesystem::path& index_path) {
    std::ifstream in{index_path, std::ios::binary};
    if (!in) throw DataError("cannot open index file " + index_path.string());
    detail::check_preamble(in, kIndexMagic, "index file");
    DatasetIndex idx;
    std::array<std::uint8_t, kIndexEntrySize> b{};
    while (in.read(reinterpret_cast<char*>(b.data()), b.size())) {
        idx.push_back({le::get_u64(&b[0]), le::get_u64(&b[8])});
    }
    if (in.gcount() != 0) throw DataError("index file: truncated entry");
    for (std::size_t k = 1; k < idx.size(); ++k) {
        if (idx[k].offset <= idx[k - 1].offset || idx[k - 1].offset + idx[k - 1].length > idx[k].offset) {
            throw DataError("index file: entries are not ordered and disjoint");
        }
    }
    return idx;
}

inline void write_index(const std::filesystem::path& index_path, const DatasetIndex& idx) {
    std::ofstream out{index_path, std::ios::binary | std::ios::trunc};
    if (!out) throw DataError("cannot create index file " + index_path.string());
    detail::write_preamble(out, kIndexMagic);
    for (const auto& e : idx) detail::write_entry(out, e);
    if (!out) throw DataError("storage write failure");
}

/// Regenerates the sidecar index by scanning record headers.
inline DatasetIndex rebuild_index(const std::filesystem::path& data_path) {
    DatasetReader reader{data_path};
    return reader.scan_index();
}

}  // namespace dpat

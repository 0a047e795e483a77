#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "dpat/automaton.hpp"
#include "dpat/patterns.hpp"
#include "dpat/store.hpp"

using namespace dpat;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dpat_store_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SimParams params(std::uint32_t n, std::uint32_t t, std::uint64_t seed) {
    SimParams sp;
    sp.n_sites = n;
    sp.n_steps = t;
    sp.p = 0.6;
    sp.q = 0.9;
    sp.seed = seed;
    return sp;
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in{p, std::ios::binary};
    return {std::istreambuf_iterator<char>(in), {}};
}

void truncate_file(const fs::path& p, std::uintmax_t size) { fs::resize_file(p, size); }

}  // namespace

TEST(RecordHeader, LayoutIsLittleEndian) {
    RecordHeader h;
    h.n_sites = 0x04030201u;
    h.n_rows = 0x08070605u;
    h.p = 0.5;
    h.q = -2.0;
    h.seed = 0x1122334455667788ull;
    h.target = 0x2A;
    h.flags = 1;
    h.payload_len = 0xDDCCBBAAu;
    const auto b = h.encode();
    EXPECT_EQ(b.size(), 40u);
    EXPECT_EQ(b[0], 0x01);
    EXPECT_EQ(b[3], 0x04);
    EXPECT_EQ(b[4], 0x05);
    EXPECT_EQ(b[15], 0x3F);  // 0.5 = 0x3FE0000000000000
    EXPECT_EQ(b[14], 0xE0);
    EXPECT_EQ(b[23], 0xC0);  // -2.0 = 0xC000000000000000
    EXPECT_EQ(b[24], 0x88);
    EXPECT_EQ(b[31], 0x11);
    EXPECT_EQ(b[32], 0x2A);
    EXPECT_EQ(b[33], 0x01);
    EXPECT_EQ(b[34], 0x00);
    EXPECT_EQ(b[35], 0x00);
    EXPECT_EQ(b[36], 0xAA);
    EXPECT_EQ(b[39], 0xDD);
    const auto back = RecordHeader::decode(b);
    EXPECT_EQ(back.n_sites, h.n_sites);
    EXPECT_EQ(back.seed, h.seed);
    EXPECT_EQ(back.q, h.q);
    EXPECT_EQ(back.payload_len, h.payload_len);
}

TEST(RecordHeader, Validation) {
    RecordHeader h;
    h.n_sites = 5;
    h.n_rows = 5;
    EXPECT_NO_THROW(h.validate());
    h.reserved = 1;
    EXPECT_THROW(h.validate(), DataError);
    h.reserved = 0;
    h.target = 0b11;
    EXPECT_THROW(h.validate(), DataError);
    h.target = 0x40;
    EXPECT_THROW(h.validate(), DataError);
    h.target = 0;
    h.flags = 2;
    EXPECT_THROW(h.validate(), DataError);
}

TEST(Dataset, OffsetsAndRoundTrip) {
    TempDir dir;
    const auto data = dir.path / "d.dpds", index = dir.path / "d.dpix";
    const auto f1 = simulate(params(50, 1000, 1));
    MultiHotTarget t1;
    t1[PatternKind::PL] = true;
    const auto f2 = simulate(params(13, 7, 2));
    const auto t2 = label_field(f2);
    IndexEntry e1, e2;
    {
        DatasetWriter w{data, index};
        e1 = w.append(f1, params(50, 1000, 1), t1);
        e2 = w.append(f2, params(13, 7, 2), t2);
    }
    EXPECT_EQ(e1.offset, 0u);
    EXPECT_EQ(e2.offset, e1.length);
    EXPECT_EQ(read_index(index), (DatasetIndex{e1, e2}));

    const auto r1 = read_record(data, e1);
    EXPECT_EQ(r1.field, f1);
    EXPECT_EQ(r1.params, params(50, 1000, 1));
    EXPECT_EQ(r1.target, t1);
    EXPECT_EQ(r1.target.to_string(), "[0,1,0,0,0,0]");
    const auto r2 = read_record(data, e2);
    EXPECT_EQ(r2.field, f2);
    EXPECT_EQ(r2.target, t2);

    // Header on disk agrees with the index length.
    DatasetReader reader{data};
    EXPECT_EQ(reader.read_header(e2.offset).payload_len + kRecordHeaderSize, e2.length);
}

TEST(Dataset, UncompressedPayloadIsPackedRows) {
    TempDir dir;
    const auto data = dir.path / "u.dpds", index = dir.path / "u.dpix";
    const auto f = field_from_rows({"1000000001", "0100000010"});
    {
        DatasetWriter w{data, index, false};
        w.append(f, params(10, 1, 3), MultiHotTarget{});
    }
    const auto bytes = slurp(data);
    ASSERT_EQ(bytes.size(), 5u + 40u + 4u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DPDS");
    EXPECT_EQ(bytes[4], 1);
    EXPECT_EQ(static_cast<unsigned char>(bytes[45]), 0x01);
    EXPECT_EQ(static_cast<unsigned char>(bytes[46]), 0x02);
    EXPECT_EQ(static_cast<unsigned char>(bytes[47]), 0x02);
    EXPECT_EQ(static_cast<unsigned char>(bytes[48]), 0x01);
    EXPECT_EQ(read_record(data, read_index(index).at(0)).field, f);
}

TEST(Dataset, RandomRoundTripProperty) {
    TempDir dir;
    const auto data = dir.path / "r.dpds", index = dir.path / "r.dpix";
    std::mt19937_64 rng{17};
    std::vector<SpaceTimeField> fields;
    std::vector<SimParams> ps;
    std::vector<MultiHotTarget> ts;
    {
        DatasetWriter w{data, index};
        for (int k = 0; k < 200; ++k) {
            const std::uint32_t n = 3 + rng() % (k % 10 == 0 ? 4094 : 80);
            const std::uint32_t t = 1 + rng() % (k % 25 == 0 ? 3000 : 60);
            auto sp = params(n, t, rng());
            sp.p = std::uniform_real_distribution<double>()(rng);
            sp.q = std::uniform_real_distribution<double>()(rng);
            fields.push_back(simulate(sp));
            ps.push_back(sp);
            ts.push_back(label_field(fields.back()));
            w.append(fields.back(), sp, ts.back());
        }
    }
    const auto idx = read_index(index);
    ASSERT_EQ(idx.size(), 200u);
    DatasetReader reader{data};
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto r = reader.read(idx[k]);
        EXPECT_EQ(r.field, fields[k]);
        EXPECT_EQ(r.params.seed, ps[k].seed);
        EXPECT_EQ(r.params.p, ps[k].p);
        EXPECT_EQ(r.target, ts[k]);
    }
    EXPECT_EQ(rebuild_index(data), idx);
}

TEST(Dataset, TruncationIsAnError) {
    TempDir dir;
    const auto data = dir.path / "t.dpds", index = dir.path / "t.dpix";
    IndexEntry e;
    {
        DatasetWriter w{data, index};
        e = w.append(simulate(params(40, 100, 5)), params(40, 100, 5), MultiHotTarget{});
    }
    truncate_file(data, kPreambleSize + e.length - 3);
    EXPECT_THROW(read_record(data, e), DataError);
    EXPECT_THROW(rebuild_index(data), DataError);
    truncate_file(data, kPreambleSize + 20);
    EXPECT_THROW(read_record(data, e), DataError);
    truncate_file(data, 3);
    EXPECT_THROW(DatasetReader{data}, DataError);
}

TEST(Dataset, CorruptionIsDetected) {
    TempDir dir;
    const auto data = dir.path / "c.dpds", index = dir.path / "c.dpix";
    IndexEntry e;
    {
        DatasetWriter w{data, index, false};
        e = w.append(field_from_rows({"101", "010"}), params(3, 1, 5), MultiHotTarget{});
    }
    auto poke = [&](std::size_t pos, char value) {
        std::fstream f{data, std::ios::binary | std::ios::in | std::ios::out};
        f.seekp(static_cast<std::streamoff>(pos));
        f.put(value);
    };
    poke(kPreambleSize + 40, static_cast<char>(0x85));  // pad bit above site 2
    EXPECT_THROW(read_record(data, e), DataError);
    poke(kPreambleSize + 40, 0x05);
    EXPECT_NO_THROW(read_record(data, e));
    poke(kPreambleSize + 34, 1);  // reserved
    EXPECT_THROW(read_record(data, e), DataError);
    poke(kPreambleSize + 34, 0);
    EXPECT_THROW(read_record(data, {e.offset, e.length + 1}), DataError);
    poke(0, 'X');
    EXPECT_THROW(DatasetReader{data}, DataError);
}

TEST(Dataset, CorruptDeflateStream) {
    TempDir dir;
    const auto data = dir.path / "z.dpds", index = dir.path / "z.dpix";
    IndexEntry e;
    {
        DatasetWriter w{data, index};
        e = w.append(simulate(params(64, 64, 5)), params(64, 64, 5), MultiHotTarget{});
    }
    std::fstream f{data, std::ios::binary | std::ios::in | std::ios::out};
    f.seekp(static_cast<std::streamoff>(kPreambleSize + 40));
    f.put(static_cast<char>(0xFF));
    f.put(static_cast<char>(0xFF));
    f.close();
    EXPECT_THROW(read_record(data, e), DataError);
}

TEST(Dataset, IndexFileValidation) {
    TempDir dir;
    const auto index = dir.path / "i.dpix";
    write_index(index, {{0, 50}, {50, 60}});
    EXPECT_EQ(read_index(index).size(), 2u);
    write_index(index, {{0, 50}, {40, 60}});
    EXPECT_THROW(read_index(index), DataError);
    write_index(index, {{0, 50}});
    truncate_file(index, 5 + 10);
    EXPECT_THROW(read_index(index), DataError);
    EXPECT_THROW(read_index(dir.path / "missing.dpix"), DataError);
}

TEST(Dataset, RejectsInconsistentTarget) {
    TempDir dir;
    DatasetWriter w{dir.path / "x.dpds", dir.path / "x.dpix"};
    MultiHotTarget bad;
    bad[PatternKind::D] = true;
    EXPECT_THROW(w.append(SpaceTimeField{3, 2}, params(3, 1, 0), bad), std::invalid_argument);
}

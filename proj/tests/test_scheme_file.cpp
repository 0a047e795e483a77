#include <gtest/gtest.h>

#include "dpat/scheme_file.hpp"

using namespace dpat;

TEST(SchemeFile, EmptyTextKeepsDefaults) {
    EXPECT_EQ(parse_scheme_text("# nothing\n\n").by_kind, PatternSchemes::builtin().by_kind);
}

TEST(SchemeFile, OverridesOneSection) {
    const auto s = parse_scheme_text(R"(
[D]
block = 2x1
stride = 1x1          # overlapping
active = 10 01
adjacency = 1,0 -1,0 0,1 0,-1 1,1 -1,-1
)");
    const auto& d = s[PatternKind::D];
    EXPECT_EQ(d.stride_space, 1u);
    EXPECT_EQ(d.stride_time, 1u);
    EXPECT_EQ(d.adjacency.size(), 6u);
    EXPECT_TRUE(d.active[0b01]);
    EXPECT_TRUE(d.active[0b10]);
    EXPECT_FALSE(d.active[0b11]);
    EXPECT_EQ(s[PatternKind::Q], builtin_scheme(PatternKind::Q));
}

TEST(SchemeFile, BlockChangeDefaultsStride) {
    const auto s = parse_scheme_text("[PL]\nblock = 1x2\nactive = 11\nadjacency = nearest\n");
    EXPECT_EQ(s[PatternKind::PL].stride_space, 1u);
    EXPECT_EQ(s[PatternKind::PL].stride_time, 2u);
}

TEST(SchemeFile, RoundTrip) {
    const auto builtin = PatternSchemes::builtin();
    EXPECT_EQ(parse_scheme_text(format_schemes(builtin)).by_kind, builtin.by_kind);
    const auto calibrated = load_scheme_file(DPAT_SOURCE_DIR "/schemes/calibrated_q09.ini");
    EXPECT_EQ(parse_scheme_text(format_schemes(calibrated)).by_kind, calibrated.by_kind);
    EXPECT_NE(calibrated.by_kind, builtin.by_kind);
}

TEST(SchemeFile, CalibratedAdjacencySupersets) {
    // D+ must contain D's offsets (and Q+ Q's) so D implies D+.
    const auto s = load_scheme_file(DPAT_SOURCE_DIR "/schemes/calibrated_q09.ini");
    auto contains = [](const RenormScheme& big, const RenormScheme& small) {
        for (const auto& o : small.adjacency) {
            if (std::find(big.adjacency.begin(), big.adjacency.end(), o) == big.adjacency.end()) return false;
        }
        return big.active == small.active && big.block_width == small.block_width &&
               big.stride_space == small.stride_space && big.stride_time == small.stride_time;
    };
    EXPECT_TRUE(contains(s[PatternKind::Dplus], s[PatternKind::D]));
    EXPECT_TRUE(contains(s[PatternKind::Qplus], s[PatternKind::Q]));
}

TEST(SchemeFile, Errors) {
    auto line_of = [](const std::string& text) {
        try {
            parse_scheme_text(text);
        } catch (const SchemeFileError& e) {
            return e.line();
        }
        return -1;
    };
    EXPECT_EQ(line_of("block = 2x1\n"), 1);
    EXPECT_EQ(line_of("[X]\n"), 1);
    EXPECT_EQ(line_of("[A]\n"), 1);
    EXPECT_EQ(line_of("[D]\n\nblock = 2\n"), 3);
    EXPECT_EQ(line_of("[D]\nactive = 1\n"), 1);
    EXPECT_EQ(line_of("[D]\nadjacency = 1,0\n"), 1);
    EXPECT_EQ(line_of("[D]\nadjacency = 1;0\n"), 2);
    EXPECT_EQ(line_of("[Q]\nblock = 3x1\n"), 1);
    EXPECT_EQ(line_of("[Q]\nblock = 5x4\nactive = 1\n"), 1);
    EXPECT_EQ(line_of("[D]\ncolour = red\n"), 2);
    EXPECT_EQ(line_of("[D\n"), 1);
    EXPECT_THROW(load_scheme_file("/nonexistent/schemes.ini"), std::runtime_error);
}

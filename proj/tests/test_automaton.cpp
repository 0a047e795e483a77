#include <gtest/gtest.h>

#include <cmath>

#include "dpat/automaton.hpp"

using namespace dpat;

namespace {

std::vector<std::uint8_t> packed_row(const std::string& bits) {
    const auto field = field_from_rows({bits});
    return {field.packed().begin(), field.packed().end()};
}

std::string row_text(std::span<const std::uint8_t> row, std::uint32_t n) {
    std::string s;
    for (std::uint32_t i = 0; i < n; ++i) s += ((row[i / 8] >> (i % 8)) & 1u) ? '1' : '0';
    return s;
}

SimParams params(std::uint32_t n, std::uint32_t t, double p, double q, std::uint64_t seed, double rho = 0.5) {
    SimParams sp;
    sp.n_sites = n;
    sp.n_steps = t;
    sp.p = p;
    sp.q = q;
    sp.seed = seed;
    sp.init_density = rho;
    return sp;
}

}  // namespace

TEST(RuleProb, TableExamples) {
    EXPECT_DOUBLE_EQ(rule_prob(true, true, true, 0.3, 0.7), 0.3);
    EXPECT_NEAR(rule_prob(false, true, true, 0.3, 0.9), 0.99, 1e-12);
    EXPECT_DOUBLE_EQ(rule_prob(false, false, false, 0.3, 0.9), 0.0);
    EXPECT_DOUBLE_EQ(rule_prob(false, true, false, 0.3, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(rule_prob(false, false, true, 0.3, 0.5), 0.5);
}

TEST(RuleProb, MatchesComplementForm) {
    for (double q : {0.0, 0.1, 0.5, 0.9, 1.0}) {
        for (int k = 0; k <= 2; ++k) {
            const double expect = 1.0 - std::pow(1.0 - q, k);
            EXPECT_NEAR(rule_prob(false, k >= 1, k >= 2, 0.4, q), expect, 1e-12);
        }
    }
}

TEST(RuleTable, IndexLayout) {
    const auto t = make_rule_table(0.25, 0.5);
    EXPECT_DOUBLE_EQ(t[0b000], 0.0);
    EXPECT_DOUBLE_EQ(t[0b100], 0.5);
    EXPECT_DOUBLE_EQ(t[0b001], 0.5);
    EXPECT_DOUBLE_EQ(t[0b101], 0.75);
    for (unsigned c : {0b010u, 0b011u, 0b110u, 0b111u}) EXPECT_DOUBLE_EQ(t[c], 0.25);
}

TEST(SimParams, Validation) {
    EXPECT_THROW(params(2, 10, 0.5, 0.5, 0).validate(), std::invalid_argument);
    EXPECT_THROW(params(10, 0, 0.5, 0.5, 0).validate(), std::invalid_argument);
    EXPECT_THROW(params(10, 10, 1.5, 0.5, 0).validate(), std::invalid_argument);
    EXPECT_THROW(params(10, 10, 0.5, -0.1, 0).validate(), std::invalid_argument);
    EXPECT_THROW(params(10, 10, 0.5, 0.5, 0, 2.0).validate(), std::invalid_argument);
    EXPECT_NO_THROW(params(3, 1, 0.0, 1.0, 0).validate());
}

TEST(Step, AllZeroStaysZero) {
    const CounterStream rng{5, streams::kAutomaton};
    const auto out = step(packed_row("0000000000"), params(10, 1, 0.9, 0.9, 5), rng, 1);
    EXPECT_EQ(row_text(out, 10), "0000000000");
}

TEST(Step, CertainRules) {
    const CounterStream rng{5, streams::kAutomaton};
    EXPECT_EQ(row_text(step(packed_row("0110"), params(4, 1, 1, 1, 5), rng, 1), 4), "1111");
    EXPECT_EQ(row_text(step(packed_row("101"), params(3, 1, 0, 0, 5), rng, 1), 3), "000");
}

TEST(Step, RejectsWrongLength) {
    const CounterStream rng{5, streams::kAutomaton};
    EXPECT_THROW(step(packed_row("0110"), params(12, 1, 1, 1, 5), rng, 1), std::invalid_argument);
}

TEST(Step, ComparesOneDrawPerSite) {
    // Site i becomes occupied exactly when its own uniform falls below the rule probability.
    const CounterStream rng{77, streams::kAutomaton};
    const std::string in = "0110100111010010011";
    const auto n = static_cast<std::uint32_t>(in.size());
    const auto sp = params(n, 1, 0.4, 0.6, 77);
    const auto out = step(packed_row(in), sp, rng, 9);
    for (std::uint32_t i = 0; i < n; ++i) {
        const bool l = in[(i + n - 1) % n] == '1', c = in[i] == '1', r = in[(i + 1) % n] == '1';
        const bool expect = rng.uniform(9, i) < rule_prob(c, l, r, sp.p, sp.q);
        EXPECT_EQ(row_text(out, n)[i] == '1', expect) << "site " << i;
    }
}

TEST(Simulate, Shape) {
    const auto f = simulate(params(50, 100, 0.5, 0.5, 1));
    EXPECT_EQ(f.n_sites(), 50u);
    EXPECT_EQ(f.n_rows(), 101u);
    EXPECT_TRUE(f.pad_bits_clear());
}

TEST(Simulate, ZeroRatesKillEverything) {
    const auto f = simulate(params(30, 20, 0, 0, 11, 1.0));
    EXPECT_EQ(f.row_count(0), 30u);
    for (std::uint32_t t = 1; t < f.n_rows(); ++t) EXPECT_TRUE(f.row_empty(t));
    EXPECT_EQ(extinction_time(f), 1u);
}

TEST(Simulate, FullSurvival) {
    const auto f = simulate(params(21, 30, 1.0, 0.3, 4, 1.0));
    EXPECT_EQ(f.occupied(), 21u * 31u);
    EXPECT_FALSE(extinction_time(f).has_value());
}

TEST(Simulate, Reproducible) {
    const auto a = simulate(params(37, 200, 0.6, 0.8, 1234));
    const auto b = simulate(params(37, 200, 0.6, 0.8, 1234));
    const auto c = simulate(params(37, 200, 0.6, 0.8, 1235));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(Simulate, RowsFollowStep) {
    const auto sp = params(19, 12, 0.55, 0.7, 99);
    const auto f = simulate(sp);
    const CounterStream rng{sp.seed, streams::kAutomaton};
    for (std::uint32_t t = 0; t + 1 < f.n_rows(); ++t) {
        const auto next = step(f.row(t), sp, rng, t + 1);
        EXPECT_TRUE(std::equal(next.begin(), next.end(), f.row(t + 1).begin()));
    }
}

TEST(Simulate, GoldenField) {
    // Frozen output; guards the random layout against accidental changes.
    const auto f = simulate(params(12, 5, 0.6, 0.9, 2024));
    EXPECT_EQ(f.to_text(),
              "010111010101\n"
              "111010101110\n"
              "010101111111\n"
              "101111000101\n"
              "111111101110\n"
              "001000111011\n");
}

TEST(Simulate, LimitBehaviour) {
    // p = 0: an occupied center with empty neighbours never survives.
    // q = 0: an empty site never activates.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto f0 = simulate(params(40, 40, 0.0, 0.7, seed));
        const auto g0 = simulate(params(40, 40, 0.6, 0.0, seed));
        for (std::uint32_t t = 0; t + 1 < f0.n_rows(); ++t) {
            for (std::int64_t i = 0; i < 40; ++i) {
                if (f0.get_wrapped(i, t) && !f0.get_wrapped(i - 1, t) && !f0.get_wrapped(i + 1, t)) {
                    EXPECT_FALSE(f0.get_wrapped(i, t + 1));
                }
                if (!g0.get_wrapped(i, t)) {
                    EXPECT_FALSE(g0.get_wrapped(i, t + 1));
                }
            }
        }
    }
}

TEST(Invariants, NoSpontaneousCreationAndAbsorbing) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const double p = (seed % 10) / 10.0, q = (seed % 7) / 6.0;
        const auto f = simulate(params(3 + seed % 40, 60, p, q, seed));
        EXPECT_EQ(count_spontaneous_creations(f), 0u);
        if (const auto te = extinction_time(f)) {
            for (std::uint32_t t = *te; t < f.n_rows(); ++t) EXPECT_TRUE(f.row_empty(t));
        }
    }
}

TEST(Bernoulli, Extremes) {
    EXPECT_EQ(bernoulli_field(17, 9, 0.0, 3).occupied(), 0u);
    EXPECT_EQ(bernoulli_field(17, 9, 1.0, 3).occupied(), 17u * 9u);
    EXPECT_THROW(bernoulli_field(17, 9, 1.5, 3), std::invalid_argument);
}

TEST(Bernoulli, HalfDensityWithinThreeSigma) {
    const auto f = bernoulli_field(50, 2000, 0.5, 8);
    const double n = 50.0 * 2000.0;
    const double sigma = std::sqrt(n * 0.25);
    EXPECT_LE(std::abs(static_cast<double>(f.occupied()) - n / 2), 3 * sigma);
    EXPECT_TRUE(f.pad_bits_clear());
}

TEST(Bernoulli, UsesSeparateStream) {
    const auto a = bernoulli_field(32, 1, 0.5, 6);
    const auto b = simulate(params(32, 1, 0.5, 0.5, 6));
    EXPECT_FALSE(std::equal(a.row(0).begin(), a.row(0).end(), b.row(0).begin()));
}

TEST(Frequency, SmallSampleWithinFourSigma) {
    // Full 10^5-trial version lives in the acceptance binary.
    const std::uint32_t trials = 4000;
    for (double p : {0.1, 0.9}) {
        for (double q : {0.1, 0.9}) {
            const auto table = make_rule_table(p, q);
            std::array<std::size_t, 8> hits{};
            const CounterStream rng{derive_seed(1, 0, 0), streams::kAutomaton};
            for (std::uint32_t t = 0; t < trials; ++t) {
                for (unsigned idx = 0; idx < 8; ++idx) hits[idx] += rng.uniform(t, idx) < table[idx];
            }
            for (unsigned idx = 0; idx < 8; ++idx) {
                const double pr = table[idx];
                const double sd = std::sqrt(trials * pr * (1 - pr));
                EXPECT_LE(std::abs(hits[idx] - trials * pr), 4 * sd + 1e-9);
            }
        }
    }
}

#pragma once

// Probability sweeps, crossing estimates, phase maps and the isotropic
// Bernoulli control, plus readers for externally produced score tables.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpat/automaton.hpp"
#include "dpat/classify.hpp"
#include "dpat/parallel.hpp"
#include "dpat/patterns.hpp"
#include "dpat/rng.hpp"
#include "dpat/scheme_file.hpp"
#include "dpat/store.hpp"

namespace dpat {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    double half_width() const noexcept { return 0.5 * (hi - lo); }
};

inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for k successes in n trials.
inline Interval wilson_interval(std::size_t k, std::size_t n, double z = kZ95) {
    if (k > n) throw std::invalid_argument("wilson_interval: k > n");
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double ph = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (ph + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
    Interval iv{std::max(0.0, center - half), std::min(1.0, center + half)};
    if (k == 0) iv.lo = 0.0;
    if (k == n) iv.hi = 1.0;
    return iv;
}

/// Inclusive arithmetic grid, rounded to 12 decimals to keep values clean.
inline std::vector<double> make_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("make_grid: need step > 0 and max >= min");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) g[i] = std::round((lo + i * step) * 1e12) / 1e12;
    return g;
}

inline void validate_grid(const std::vector<double>& g, const char* what) {
    if (g.empty()) throw std::invalid_argument(std::string{what} + ": empty grid");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] >= 0.0 && g[i] <= 1.0)) throw std::invalid_argument(std::string{what} + ": value outside [0,1]");
        if (i && !(g[i] > g[i - 1])) throw std::invalid_argument(std::string{what} + ": grid not strictly increasing");
    }
}

struct SimDims {
    std::uint32_t n_sites = 50;
    std::uint32_t n_steps = 2000;
    double init_density = 0.5;
};

enum class SweepSource { DeterministicLabels, NnScores };

inline std::string_view source_name(SweepSource s) noexcept {
    return s == SweepSource::DeterministicLabels ? "deterministic-labels" : "nn-scores";
}

struct SweepResult {
    double q = 0.0;
    std::vector<double> p_grid;
    std::vector<PatternProbs> prob;
    std::vector<PatternProbs> half_width;
    std::vector<std::size_t> trials;
    SweepSource source = SweepSource::DeterministicLabels;

    double at(std::size_t i, PatternKind k) const { return prob.at(i)[index_of(k)]; }
};

namespace detail {

/// Label masks for n_points x n_real independent work items.
template <class Fn>
std::vector<std::uint8_t> run_masks(std::size_t n_points, std::size_t n_real, Fn&& fn, unsigned threads) {
    std::vector<std::uint8_t> masks(n_points * n_real);
    parallel_for(
        masks.size(), [&](std::size_t g) { masks[g] = fn(g / n_real, g % n_real).mask(); }, threads);
    return masks;
}

inline void aggregate(const std::vector<std::uint8_t>& masks, std::size_t point, std::size_t n_real,
                      PatternProbs& prob, PatternProbs& hw) {
    std::array<std::size_t, kPatternCount> counts{};
    for (std::size_t r = 0; r < n_real; ++r) {
        const auto m = masks[point * n_real + r];
        for (std::size_t k = 0; k < kPatternCount; ++k) counts[k] += (m >> k) & 1u;
    }
    for (std::size_t k = 0; k < kPatternCount; ++k) {
        prob[k] = static_cast<double>(counts[k]) / static_cast<double>(n_real);
        hw[k] = wilson_interval(counts[k], n_real).half_width();
    }
}

inline SimParams params_for(const SimDims& dims, double p, double q, std::uint64_t seed) {
    SimParams sp;
    sp.n_sites = dims.n_sites;
    sp.n_steps = dims.n_steps;
    sp.p = p;
    sp.q = q;
    sp.seed = seed;
    sp.init_density = dims.init_density;
    sp.validate();
    return sp;
}

}  // namespace detail

/// Deterministic-label sweep along p at fixed q. Realization r at grid index
/// i uses seed derive_seed(master_seed, i, r).
inline SweepResult sweep_fixed_q(double q, const std::vector<double>& p_grid, std::size_t n_real, const SimDims& dims,
                                 std::uint64_t master_seed, const PatternSchemes& schemes = PatternSchemes::builtin(),
                                 unsigned threads = 0) {
    validate_grid(p_grid, "sweep_fixed_q");
    if (n_real == 0) throw std::invalid_argument("sweep_fixed_q: n_real must be positive");
    detail::params_for(dims, p_grid.front(), q, 0);
    const auto masks = detail::run_masks(
        p_grid.size(), n_real,
        [&](std::size_t i, std::size_t r) {
            return label_field(simulate(detail::params_for(dims, p_grid[i], q, derive_seed(master_seed, i, r))),
                               schemes);
        },
        threads);
    SweepResult res;
    res.q = q;
    res.p_grid = p_grid;
    res.prob.resize(p_grid.size());
    res.half_width.resize(p_grid.size());
    res.trials.assign(p_grid.size(), n_real);
    for (std::size_t i = 0; i < p_grid.size(); ++i) detail::aggregate(masks, i, n_real, res.prob[i], res.half_width[i]);
    return res;
}

/// Isotropic control over fill fraction p_b; site spanning stands in for
/// survival. The result's q is NaN.
inline SweepResult bernoulli_control(const std::vector<double>& pb_grid, std::size_t n_real, const SimDims& dims,
                                     std::uint64_t master_seed,
                                     const PatternSchemes& schemes = PatternSchemes::builtin(), unsigned threads = 0) {
    validate_grid(pb_grid, "bernoulli_control");
    if (n_real == 0) throw std::invalid_argument("bernoulli_control: n_real must be positive");
    const auto masks = detail::run_masks(
        pb_grid.size(), n_real,
        [&](std::size_t i, std::size_t r) {
            return label_isotropic(
                bernoulli_field(dims.n_sites, dims.n_steps + 1, pb_grid[i], derive_seed(master_seed, i, r)), schemes);
        },
        threads);
    SweepResult res;
    res.q = std::nan("");
    res.p_grid = pb_grid;
    res.prob.resize(pb_grid.size());
    res.half_width.resize(pb_grid.size());
    res.trials.assign(pb_grid.size(), n_real);
    for (std::size_t i = 0; i < pb_grid.size(); ++i) detail::aggregate(masks, i, n_real, res.prob[i], res.half_width[i]);
    return res;
}

// ---------------------------------------------------------------------------
// Crossings

struct CriticalEstimate {
    PatternKind pattern = PatternKind::D;
    double q = 0.0;
    double p_c = 0.0;
    double threshold = 0.5;
    double p_lo = 0.0;  // bracketing grid points
    double p_hi = 0.0;
    bool descending = true;
};

/// Every adjacent grid pair where P_k moves across `threshold`, linearly
/// interpolated.
inline std::vector<CriticalEstimate> find_crossings(const SweepResult& s, PatternKind k, double threshold) {
    std::vector<CriticalEstimate> out;
    for (std::size_t i = 0; i + 1 < s.p_grid.size(); ++i) {
        const double a = s.at(i, k);
        const double b = s.at(i + 1, k);
        if ((a > threshold) == (b > threshold)) continue;
        CriticalEstimate c;
        c.pattern = k;
        c.q = s.q;
        c.threshold = threshold;
        c.p_lo = s.p_grid[i];
        c.p_hi = s.p_grid[i + 1];
        c.descending = a > b;
        c.p_c = c.p_lo + (threshold - a) * (c.p_hi - c.p_lo) / (b - a);
        out.push_back(c);
    }
    return out;
}

/// Exit point (outermost decreasing crossing) when the pattern vanishes
/// along the sweep, otherwise the onset (first increasing crossing).
inline std::optional<CriticalEstimate> estimate_crossing(const SweepResult& s, PatternKind k, double threshold = 0.5) {
    const auto all = find_crossings(s, k, threshold);
    for (auto it = all.rbegin(); it != all.rend(); ++it) {
        if (it->descending) return *it;
    }
    for (const auto& c : all) {
        if (!c.descending) return c;
    }
    return std::nullopt;
}

/// p-width of the band lo < P_k < hi on the decreasing (or increasing) flank,
/// measured between the widest pair of crossings.
inline std::optional<double> transition_width(const SweepResult& s, PatternKind k, double lo = 0.1, double hi = 0.9,
                                              bool descending = true) {
    auto pick = [&](double level, bool first) -> std::optional<double> {
        std::optional<double> found;
        for (const auto& c : find_crossings(s, k, level)) {
            if (c.descending != descending) continue;
            if (first && found) break;
            found = c.p_c;
        }
        return found;
    };
    const auto enter = descending ? pick(hi, true) : pick(lo, true);
    const auto leave = descending ? pick(lo, false) : pick(hi, false);
    if (!enter || !leave) return std::nullopt;
    return *leave - *enter;
}

// ---------------------------------------------------------------------------
// Phase maps

struct PhaseMap {
    std::vector<double> p_grid;
    std::vector<double> q_grid;
    std::vector<PatternProbs> prob;  // row-major, index iq * p_grid.size() + ip
    std::vector<std::size_t> trials;
    std::vector<PhaseClass> cls;
    PatternProbs thresholds = kDefaultThresholds;

    std::size_t cell(std::size_t ip, std::size_t iq) const noexcept { return iq * p_grid.size() + ip; }
    PhaseClass at(std::size_t ip, std::size_t iq) const { return cls.at(cell(ip, iq)); }

    void reclassify(const PatternProbs& th) {
        thresholds = th;
        cls.resize(prob.size());
        for (std::size_t c = 0; c < prob.size(); ++c) cls[c] = assign_class(prob[c], thresholds);
    }
};

/// Cell (ip, iq) realization r uses seed derive_seed(master_seed, cell, r).
inline PhaseMap phase_map(const std::vector<double>& p_grid, const std::vector<double>& q_grid, std::size_t n_real,
                          const SimDims& dims, const PatternProbs& thresholds, std::uint64_t master_seed,
                          const PatternSchemes& schemes = PatternSchemes::builtin(), unsigned threads = 0) {
    validate_grid(p_grid, "phase_map");
    validate_grid(q_grid, "phase_map");
    if (n_real == 0) throw std::invalid_argument("phase_map: n_real must be positive");
    PhaseMap m;
    m.p_grid = p_grid;
    m.q_grid = q_grid;
    const std::size_t cells = p_grid.size() * q_grid.size();
    const auto masks = detail::run_masks(
        cells, n_real,
        [&](std::size_t c, std::size_t r) {
            const double p = p_grid[c % p_grid.size()];
            const double q = q_grid[c / p_grid.size()];
            return label_field(simulate(detail::params_for(dims, p, q, derive_seed(master_seed, c, r))), schemes);
        },
        threads);
    m.prob.resize(cells);
    m.trials.assign(cells, n_real);
    PatternProbs hw{};
    for (std::size_t c = 0; c < cells; ++c) detail::aggregate(masks, c, n_real, m.prob[c], hw);
    m.reclassify(thresholds);
    return m;
}

/// True when `target` holds at the (p_min, q_min) corner and all cells of
/// that class form one 4-connected region.
inline bool region_anchored_at_origin(const PhaseMap& m, PhaseClass target) {
    const std::size_t np = m.p_grid.size(), nq = m.q_grid.size();
    if (np == 0 || nq == 0 || m.at(0, 0) != target) return false;
    std::vector<bool> seen(np * nq, false);
    std::queue<std::pair<std::size_t, std::size_t>> todo;
    todo.push({0, 0});
    seen[0] = true;
    std::size_t reached = 0;
    while (!todo.empty()) {
        const auto [ip, iq] = todo.front();
        todo.pop();
        ++reached;
        const std::pair<long, long> nbrs[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& [dp, dq] : nbrs) {
            const long a = static_cast<long>(ip) + dp, b = static_cast<long>(iq) + dq;
            if (a < 0 || b < 0 || a >= static_cast<long>(np) || b >= static_cast<long>(nq)) continue;
            const std::size_t c = m.cell(a, b);
            if (seen[c] || m.cls[c] != target) continue;
            seen[c] = true;
            todo.push({static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
        }
    }
    return reached == static_cast<std::size_t>(std::count(m.cls.begin(), m.cls.end(), target));
}

// ---------------------------------------------------------------------------
// Text formats

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline double parse_double(const std::string& s, const std::string& ctx) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw DataError(ctx + ": bad number '" + s + "'");
    return v;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& ctx) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw DataError(ctx + ": bad integer '" + s + "'");
    return v;
}

inline std::string csv_header_tail() {
    std::string h;
    for (auto k : kCanonicalOrder) h += "," + std::string{pattern_name(k)};
    return h;
}

inline bool read_content_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        line = trim(line);
        if (!line.empty() && line.front() != '#') return true;
    }
    return false;
}

inline std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in{path};
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

}  // namespace detail

struct ScoreRow {
    double p = 0.0;
    double q = 0.0;
    std::uint64_t realization = 0;
    PatternProbs scores{};
};

using ScoreTable = std::vector<ScoreRow>;

inline constexpr std::string_view kScoreHeader = "p,q,realization,A,PL,Qplus,Dplus,Q,D";

inline ScoreTable parse_score_table(std::istream& in) {
    std::string line;
    if (!detail::read_content_line(in, line)) throw DataError("score table: empty input");
    std::string compact;
    for (char ch : line) {
        if (ch != ' ' && ch != '\t') compact += ch;
    }
    if (compact != kScoreHeader) throw DataError("score table: header must be '" + std::string{kScoreHeader} + "'");
    ScoreTable rows;
    std::size_t line_no = 1;
    while (detail::read_content_line(in, line)) {
        ++line_no;
        const std::string ctx = "score table row " + std::to_string(line_no);
        const auto f = detail::split_csv(line);
        if (f.size() != 3 + kPatternCount) throw DataError(ctx + ": expected 9 fields");
        ScoreRow r;
        r.p = detail::parse_double(f[0], ctx);
        r.q = detail::parse_double(f[1], ctx);
        r.realization = detail::parse_u64(f[2], ctx);
        for (std::size_t k = 0; k < kPatternCount; ++k) {
            r.scores[k] = detail::parse_double(f[3 + k], ctx);
            if (!(r.scores[k] >= 0.0 && r.scores[k] <= 1.0)) throw DataError(ctx + ": score outside [0,1]");
        }
        if (!(r.p >= 0 && r.p <= 1 && r.q >= 0 && r.q <= 1)) throw DataError(ctx + ": (p,q) outside [0,1]");
        rows.push_back(r);
    }
    return rows;
}

inline ScoreTable load_score_table(const std::filesystem::path& path) {
    auto in = detail::open_or_throw(path);
    return parse_score_table(in);
}

/// "pattern=value" lines; every canonical pattern must be present once.
inline PatternProbs parse_thresholds(std::istream& in) {
    PatternProbs th{};
    std::array<bool, kPatternCount> seen{};
    std::string line;
    while (detail::read_content_line(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("thresholds: expected pattern=value, got '" + line + "'");
        const auto name = detail::trim(line.substr(0, eq));
        const auto kind = parse_pattern(name);
        if (!kind) throw DataError("thresholds: unknown pattern '" + name + "'");
        const double v = detail::parse_double(detail::trim(line.substr(eq + 1)), "thresholds");
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("thresholds: value outside [0,1] for " + name);
        if (seen[index_of(*kind)]) throw DataError("thresholds: duplicate entry for " + name);
        seen[index_of(*kind)] = true;
        th[index_of(*kind)] = v;
    }
    for (std::size_t k = 0; k < kPatternCount; ++k) {
        if (!seen[k]) throw DataError("thresholds: missing " + std::string{pattern_name(kCanonicalOrder[k])});
    }
    return th;
}

inline PatternProbs load_thresholds(const std::filesystem::path& path) {
    auto in = detail::open_or_throw(path);
    return parse_thresholds(in);
}

namespace detail {

inline bool same_value(double a, double b) noexcept { return std::abs(a - b) <= 1e-9; }

/// Distinct sorted values up to a 1e-9 tolerance.
inline std::vector<double> distinct(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v) {
        if (out.empty() || !same_value(out.back(), x)) out.push_back(x);
    }
    return out;
}

inline std::size_t locate(const std::vector<double>& grid, double x) {
    auto it = std::lower_bound(grid.begin(), grid.end(), x - 1e-9);
    return static_cast<std::size_t>(it - grid.begin());
}

/// Mean scores per group with a normal-approximation 95% half-width.
struct ScoreAccumulator {
    std::size_t n = 0;
    PatternProbs sum{}, sum_sq{};

    void add(const PatternProbs& s) {
        ++n;
        for (std::size_t k = 0; k < kPatternCount; ++k) {
            sum[k] += s[k];
            sum_sq[k] += s[k] * s[k];
        }
    }
    void finish(PatternProbs& mean, PatternProbs& hw) const {
        for (std::size_t k = 0; k < kPatternCount; ++k) {
            mean[k] = sum[k] / n;
            const double var = n > 1 ? std::max(0.0, (sum_sq[k] - n * mean[k] * mean[k]) / (n - 1)) : 0.0;
            hw[k] = kZ95 * std::sqrt(var / n);
        }
    }
};

}  // namespace detail

/// Mean-score sweep over the rows whose q matches.
inline SweepResult sweep_from_scores(const ScoreTable& table, double q) {
    std::vector<double> ps;
    for (const auto& r : table) {
        if (detail::same_value(r.q, q)) ps.push_back(r.p);
    }
    if (ps.empty()) throw DataError("score table has no rows at the requested q");
    SweepResult res;
    res.q = q;
    res.source = SweepSource::NnScores;
    res.p_grid = detail::distinct(ps);
    std::vector<detail::ScoreAccumulator> acc(res.p_grid.size());
    for (const auto& r : table) {
        if (detail::same_value(r.q, q)) acc[detail::locate(res.p_grid, r.p)].add(r.scores);
    }
    res.prob.resize(acc.size());
    res.half_width.resize(acc.size());
    res.trials.resize(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        acc[i].finish(res.prob[i], res.half_width[i]);
        res.trials[i] = acc[i].n;
    }
    return res;
}

/// Phase map over the distinct (p, q) values of a score table. Cells with no
/// rows are reported as an error.
inline PhaseMap phase_map_from_scores(const ScoreTable& table, const PatternProbs& thresholds) {
    if (table.empty()) throw DataError("score table is empty");
    std::vector<double> ps, qs;
    for (const auto& r : table) {
        ps.push_back(r.p);
        qs.push_back(r.q);
    }
    PhaseMap m;
    m.p_grid = detail::distinct(ps);
    m.q_grid = detail::distinct(qs);
    std::vector<detail::ScoreAccumulator> acc(m.p_grid.size() * m.q_grid.size());
    for (const auto& r : table) acc[m.cell(detail::locate(m.p_grid, r.p), detail::locate(m.q_grid, r.q))].add(r.scores);
    m.prob.resize(acc.size());
    m.trials.resize(acc.size());
    PatternProbs hw{};
    for (std::size_t c = 0; c < acc.size(); ++c) {
        if (acc[c].n == 0) throw DataError("score table does not cover the full (p,q) grid");
        acc[c].finish(m.prob[c], hw);
        m.trials[c] = acc[c].n;
    }
    m.reclassify(thresholds);
    return m;
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& s) {
    out << "q,p,trials" << detail::csv_header_tail();
    for (auto k : kCanonicalOrder) out << ",hw_" << pattern_name(k);
    out << ",source\n";
    out.precision(10);
    for (std::size_t i = 0; i < s.p_grid.size(); ++i) {
        out << s.q << ',' << s.p_grid[i] << ',' << s.trials[i];
        for (double v : s.prob[i]) out << ',' << v;
        for (double v : s.half_width[i]) out << ',' << v;
        out << ',' << source_name(s.source) << '\n';
    }
}

inline SweepResult read_sweep_csv(std::istream& in) {
    std::string line;
    if (!detail::read_content_line(in, line)) throw DataError("sweep table: empty input");
    if (detail::split_csv(line).size() != 16) throw DataError("sweep table: unexpected header");
    SweepResult s;
    bool first = true;
    while (detail::read_content_line(in, line)) {
        const auto f = detail::split_csv(line);
        if (f.size() != 16) throw DataError("sweep table: expected 16 fields");
        const double q = detail::parse_double(f[0], "sweep table");
        if (first) {
            s.q = q;
            s.source = f[15] == "nn-scores" ? SweepSource::NnScores : SweepSource::DeterministicLabels;
        } else if (!(std::isnan(q) && std::isnan(s.q)) && !detail::same_value(q, s.q)) {
            throw DataError("sweep table: mixed q values");
        }
        first = false;
        s.p_grid.push_back(detail::parse_double(f[1], "sweep table"));
        s.trials.push_back(detail::parse_u64(f[2], "sweep table"));
        PatternProbs pr{}, hw{};
        for (std::size_t k = 0; k < kPatternCount; ++k) {
            pr[k] = detail::parse_double(f[3 + k], "sweep table");
            hw[k] = detail::parse_double(f[9 + k], "sweep table");
        }
        s.prob.push_back(pr);
        s.half_width.push_back(hw);
    }
    validate_grid(s.p_grid, "sweep table");
    return s;
}

inline void write_phase_csv(std::ostream& out, const PhaseMap& m) {
    out << "p,q,trials" << detail::csv_header_tail() << ",class\n";
    out.precision(10);
    for (std::size_t iq = 0; iq < m.q_grid.size(); ++iq) {
        for (std::size_t ip = 0; ip < m.p_grid.size(); ++ip) {
            const auto c = m.cell(ip, iq);
            out << m.p_grid[ip] << ',' << m.q_grid[iq] << ',' << m.trials[c];
            for (double v : m.prob[c]) out << ',' << v;
            out << ',' << class_name(m.cls[c]) << '\n';
        }
    }
}

/// Reads per-cell probabilities back and reclassifies with `thresholds`.
inline PhaseMap read_phase_csv(std::istream& in, const PatternProbs& thresholds) {
    std::string line;
    if (!detail::read_content_line(in, line)) throw DataError("phase table: empty input");
    struct Row {
        double p, q;
        std::size_t trials;
        PatternProbs prob;
    };
    std::vector<Row> rows;
    std::vector<double> ps, qs;
    while (detail::read_content_line(in, line)) {
        const auto f = detail::split_csv(line);
        if (f.size() != 10) throw DataError("phase table: expected 10 fields");
        Row r{detail::parse_double(f[0], "phase table"), detail::parse_double(f[1], "phase table"),
              static_cast<std::size_t>(detail::parse_u64(f[2], "phase table")), {}};
        for (std::size_t k = 0; k < kPatternCount; ++k) r.prob[k] = detail::parse_double(f[3 + k], "phase table");
        ps.push_back(r.p);
        qs.push_back(r.q);
        rows.push_back(r);
    }
    PhaseMap m;
    m.p_grid = detail::distinct(ps);
    m.q_grid = detail::distinct(qs);
    if (rows.size() != m.p_grid.size() * m.q_grid.size()) throw DataError("phase table: grid is not complete");
    m.prob.resize(rows.size());
    m.trials.resize(rows.size());
    for (const auto& r : rows) {
        const auto c = m.cell(detail::locate(m.p_grid, r.p), detail::locate(m.q_grid, r.q));
        m.prob[c] = r.prob;
        m.trials[c] = r.trials;
    }
    m.reclassify(thresholds);
    return m;
}

/// Binary PPM raster; p runs left to right, q bottom to top.
inline void write_phase_ppm(std::ostream& out, const PhaseMap& m, unsigned scale = 16) {
    static constexpr std::array<std::array<std::uint8_t, 3>, kPatternCount + 1> palette{{
        {40, 40, 40},     // A
        {230, 159, 0},    // PL
        {86, 180, 233},   // Q+
        {0, 158, 115},    // D+
        {0, 114, 178},    // Q
        {213, 94, 0},     // D
        {200, 200, 200},  // percolating only
    }};
    const std::size_t w = m.p_grid.size() * scale, h = m.q_grid.size() * scale;
    out << "P6\n" << w << ' ' << h << "\n255\n";
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t iq = m.q_grid.size() - 1 - y / scale;
        for (std::size_t x = 0; x < w; ++x) {
            const auto& rgb = palette[static_cast<std::size_t>(m.at(x / scale, iq))];
            out.write(reinterpret_cast<const char*>(rgb.data()), 3);
        }
    }
}

}  // namespace dpat

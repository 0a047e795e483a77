#pragma once

// Dataset generation: simulate, label and append realizations for a list of
// (p, q) points, then write a human-readable manifest.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpat/automaton.hpp"
#include "dpat/classify.hpp"
#include "dpat/parallel.hpp"
#include "dpat/patterns.hpp"
#include "dpat/rng.hpp"
#include "dpat/store.hpp"

namespace dpat {

enum class GenerationMode { SpecialPoints, RandomPoints, TestSet };

inline std::string_view mode_name(GenerationMode m) noexcept {
    switch (m) {
        case GenerationMode::SpecialPoints: return "special-points";
        case GenerationMode::RandomPoints: return "random-points";
        case GenerationMode::TestSet: return "test-set";
    }
    return "?";
}

struct SizeRange {
    std::uint32_t min = 0;
    std::uint32_t max = 0;
};

struct GenerationSpec {
    GenerationMode mode = GenerationMode::SpecialPoints;
    std::vector<std::pair<double, double>> points;  // special-points only
    std::size_t point_count = 0;                    // random-points / test-set
    std::size_t systems_per_point = 1;
    SizeRange n_sites{50, 50};
    SizeRange n_steps{1000, 1000};
    std::uint64_t master_seed = 0;
    double init_density = 0.5;
    bool compress = true;
    unsigned threads = 0;

    void validate() const {
        if (systems_per_point == 0) throw std::invalid_argument("GenerationSpec: systems_per_point must be positive");
        if (mode == GenerationMode::SpecialPoints) {
            if (points.empty()) throw std::invalid_argument("GenerationSpec: special-points mode needs a (p,q) list");
            for (const auto& [p, q] : points) {
                if (!(p >= 0 && p <= 1 && q >= 0 && q <= 1)) {
                    throw std::invalid_argument("GenerationSpec: point outside [0,1]^2");
                }
            }
        } else if (point_count == 0) {
            throw std::invalid_argument("GenerationSpec: random modes need a point count");
        }
        if (mode == GenerationMode::TestSet && systems_per_point != 1) {
            throw std::invalid_argument("GenerationSpec: test-set draws one system per point");
        }
        if (n_sites.min < 3 || n_sites.max < n_sites.min) throw std::invalid_argument("GenerationSpec: bad N range");
        if (n_steps.min < 1 || n_steps.max < n_steps.min) throw std::invalid_argument("GenerationSpec: bad T range");
        if (!(init_density >= 0 && init_density <= 1)) throw std::invalid_argument("GenerationSpec: bad init density");
    }

    std::size_t total_points() const noexcept {
        return mode == GenerationMode::SpecialPoints ? points.size() : point_count;
    }
    std::size_t total_systems() const noexcept { return total_points() * systems_per_point; }
};

/// Parameter point `index` of a spec. Random modes draw from the parameter
/// stream of the master seed; test-set uses a separate counter lane so it
/// never repeats the training points.
inline std::pair<double, double> point_at(const GenerationSpec& spec, std::size_t index) {
    if (spec.mode == GenerationMode::SpecialPoints) return spec.points.at(index);
    const CounterStream rng{spec.master_seed, streams::kParameters};
    const std::uint32_t lane = spec.mode == GenerationMode::TestSet ? 1u : 0u;
    const auto b = rng.block(static_cast<std::uint32_t>(index), lane);
    return {to_unit(b[0]), to_unit(b[1])};
}

/// Simulation parameters of realization `r` at point `index`.
inline SimParams realization_params(const GenerationSpec& spec, std::size_t index, std::size_t r) {
    SimParams sp;
    std::tie(sp.p, sp.q) = point_at(spec, index);
    sp.seed = derive_seed(spec.master_seed, index, r);
    const std::uint64_t h = splitmix64(sp.seed);
    auto pick = [](SizeRange range, std::uint32_t bits) {
        const std::uint64_t span = std::uint64_t{range.max} - range.min + 1;
        return static_cast<std::uint32_t>(range.min + bits % span);
    };
    sp.n_sites = pick(spec.n_sites, static_cast<std::uint32_t>(h));
    sp.n_steps = pick(spec.n_steps, static_cast<std::uint32_t>(h >> 32));
    sp.init_density = spec.init_density;
    return sp;
}

using Labeler = std::function<MultiHotTarget(const SpaceTimeField&)>;

struct PointSummary {
    double p = 0;
    double q = 0;
    std::size_t systems = 0;
    std::array<std::size_t, kPatternCount> label_counts{};
    std::array<std::size_t, kPatternCount + 1> class_counts{};

    PhaseClass dominant() const noexcept {
        std::size_t best = 0;
        for (std::size_t c = 1; c < class_counts.size(); ++c) {
            if (class_counts[c] > class_counts[best]) best = c;
        }
        return static_cast<PhaseClass>(best);
    }
    double dominant_fraction() const noexcept {
        return systems == 0 ? 0.0
                            : static_cast<double>(class_counts[static_cast<std::size_t>(dominant())]) / systems;
    }
};

struct DatasetPaths {
    std::filesystem::path data, index, manifest;

    static DatasetPaths from_prefix(const std::filesystem::path& prefix) {
        const std::string s = prefix.string();
        return {s + ".dpds", s + ".dpix", s + ".manifest.txt"};
    }
};

struct GenerationResult {
    DatasetPaths paths;
    DatasetIndex index;
    std::vector<PointSummary> points;
    bool complete = false;
};

inline void write_manifest(const GenerationSpec& spec, const GenerationResult& res) {
    std::ofstream out{res.paths.manifest, std::ios::trunc};
    if (!out) throw DataError("cannot write manifest " + res.paths.manifest.string());
    out << std::setprecision(10);
    out << "# dataset manifest\n";
    out << "status: " << (res.complete ? "complete" : "incomplete") << '\n';
    out << "mode: " << mode_name(spec.mode) << '\n';
    out << "master_seed: " << spec.master_seed << '\n';
    out << "seed_derivation: seed = derive_seed(master, point, realization), splitmix64 chain\n";
    out << "point_draws: special list, else Philox parameter stream (lane 0 random-points, 1 test-set)\n";
    out << "size_draws: N and T uniform in their ranges from splitmix64(seed)\n";
    out << "systems_per_point: " << spec.systems_per_point << '\n';
    out << "n_sites: " << spec.n_sites.min << ".." << spec.n_sites.max << '\n';
    out << "n_steps: " << spec.n_steps.min << ".." << spec.n_steps.max << '\n';
    out << "n_rows: n_steps + 1\n";
    out << "nt_ratio: 1:" << static_cast<double>(spec.n_steps.min + spec.n_steps.max) /
                                 (spec.n_sites.min + spec.n_sites.max)
        << " (N:T at mid-range)\n";
    out << "init_density: " << spec.init_density << '\n';
    out << "compression: " << (spec.compress ? "deflate" : "none") << '\n';
    out << "records: " << res.index.size() << " of " << spec.total_systems() << '\n';
    out << "data_file: " << res.paths.data.filename().string() << '\n';
    out << "index_file: " << res.paths.index.filename().string() << '\n';
    out << "points:\n";
    out << "point,p,q,systems,A,PL,Qplus,Dplus,Q,D,dominant,dominant_fraction,deep\n";
    for (std::size_t i = 0; i < res.points.size(); ++i) {
        const auto& s = res.points[i];
        if (s.systems == 0) continue;
        out << i << ',' << s.p << ',' << s.q << ',' << s.systems;
        for (auto c : s.label_counts) out << ',' << c;
        out << ',' << class_name(s.dominant()) << ',' << s.dominant_fraction() << ','
            << (s.dominant_fraction() >= 0.99 ? "yes" : "no") << '\n';
    }
    if (!out) throw DataError("manifest write failure");
}

/// Runs the spec into `<prefix>.dpds`, `<prefix>.dpix` and
/// `<prefix>.manifest.txt`. Records appear in (point, realization) order.
inline GenerationResult generate(const GenerationSpec& spec, const std::filesystem::path& prefix,
                                 const Labeler& labeler) {
    spec.validate();
    GenerationResult res;
    res.paths = DatasetPaths::from_prefix(prefix);
    res.points.resize(spec.total_points());
    for (std::size_t i = 0; i < res.points.size(); ++i) std::tie(res.points[i].p, res.points[i].q) = point_at(spec, i);
    write_manifest(spec, res);

    DatasetWriter writer{res.paths.data, res.paths.index, spec.compress};
    struct Item {
        SpaceTimeField field;
        SimParams params;
        MultiHotTarget target;
    };
    const std::size_t total = spec.total_systems();
    const std::size_t batch = 256;
    std::vector<Item> items;
    try {
        for (std::size_t start = 0; start < total; start += batch) {
            const std::size_t count = std::min(batch, total - start);
            items.assign(count, Item{});
            parallel_for(
                count,
                [&](std::size_t j) {
                    const std::size_t g = start + j;
                    auto& it = items[j];
                    it.params = realization_params(spec, g / spec.systems_per_point, g % spec.systems_per_point);
                    it.field = simulate(it.params);
                    it.target = labeler(it.field);
                },
                spec.threads);
            for (std::size_t j = 0; j < count; ++j) {
                const auto& it = items[j];
                res.index.push_back(writer.append(it.field, it.params, it.target));
                auto& s = res.points[(start + j) / spec.systems_per_point];
                ++s.systems;
                for (std::size_t k = 0; k < kPatternCount; ++k) s.label_counts[k] += it.target.flags[k];
                ++s.class_counts[static_cast<std::size_t>(class_of(it.target))];
            }
        }
        writer.flush();
    } catch (...) {
        try {
            writer.flush();
            write_manifest(spec, res);
        } catch (...) {
        }
        throw;
    }
    res.complete = true;
    write_manifest(spec, res);
    return res;
}

}  // namespace dpat

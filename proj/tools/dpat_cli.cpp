// Command-line front end: simulation, labeling, dataset generation, sweeps,
// phase maps, Bernoulli controls and crossing estimates.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "dpat/dpat.hpp"

namespace fs = std::filesystem;
using namespace dpat;

namespace {

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Common {
    std::string preset = "paper";
    std::optional<std::uint32_t> n, t;
    std::optional<std::size_t> reals;
    std::uint64_t seed = 1;
    double init_density = 0.5;
    std::string scheme_file;
    unsigned threads = 0;

    void add(CLI::App* app, bool with_reals = true) {
        app->add_option("--preset", preset, "desk (50x500, 256 reals) or paper (50x2000, 1024 reals)")
            ->check(CLI::IsMember({"desk", "paper"}));
        app->add_option("--n", n, "sites N");
        app->add_option("--t", t, "time steps T");
        if (with_reals) app->add_option("--reals", reals, "realizations per point");
        app->add_option("--seed", seed, "master seed");
        app->add_option("--init-density", init_density, "initial occupation probability");
        app->add_option("--scheme-file", scheme_file, "pattern scheme override file");
        app->add_option("--threads", threads, "worker threads (0 = all cores)");
    }

    SimDims dims() const {
        SimDims d{50, preset == "desk" ? 500u : 2000u, init_density};
        if (n) d.n_sites = *n;
        if (t) d.n_steps = *t;
        return d;
    }
    std::size_t realizations() const {
        const std::size_t r = reals.value_or(preset == "desk" ? 256 : 1024);
        if (r == 0) throw UsageError("--reals must be positive");
        return r;
    }
    PatternSchemes schemes() const {
        return scheme_file.empty() ? PatternSchemes::builtin() : load_scheme_file(scheme_file);
    }
};

struct Range {
    double min = 0, max = 1, step = 0.1;

    void add(CLI::App* app, const std::string& name, double lo, double hi, double st) {
        min = lo;
        max = hi;
        step = st;
        app->add_option("--" + name + "-min", min);
        app->add_option("--" + name + "-max", max);
        app->add_option("--" + name + "-step", step);
    }
    std::vector<double> grid() const {
        auto g = make_grid(min, max, step);
        validate_grid(g, "grid");
        return g;
    }
};

/// Writes to --out when given, else stdout.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw DataError("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::vector<std::pair<double, double>> parse_points(const std::string& text) {
    std::vector<std::pair<double, double>> out;
    std::stringstream in{text};
    for (std::string item; std::getline(in, item, ',');) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw UsageError("points must look like p:q,p:q");
        try {
            out.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
        } catch (const std::exception&) {
            throw UsageError("bad point '" + item + "'");
        }
    }
    return out;
}

void print_estimates(std::ostream& out, const SweepResult& s, const PatternProbs& thresholds, bool all) {
    out << "pattern,q,p_c,p_lo,p_hi,direction,threshold\n";
    out.precision(6);
    for (auto k : kCanonicalOrder) {
        const double th = thresholds[index_of(k)];
        std::vector<CriticalEstimate> list;
        if (all) {
            list = find_crossings(s, k, th);
        } else if (auto c = estimate_crossing(s, k, th)) {
            list.push_back(*c);
        }
        for (const auto& c : list) {
            out << pattern_name(k) << ',' << c.q << ',' << c.p_c << ',' << c.p_lo << ',' << c.p_hi << ','
                << (c.descending ? "exit" : "onset") << ',' << th << '\n';
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Replication automaton workbench"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate one realization and print it with its label");
    Common sim_c;
    sim_c.add(sim, false);
    double sim_p = 0.5, sim_q = 0.5;
    std::string sim_out;
    bool sim_quiet = false;
    sim->add_option("--p", sim_p, "survival probability")->capture_default_str();
    sim->add_option("--q", sim_q, "replication probability")->capture_default_str();
    sim->add_option("--out", sim_out, "write a one-record dataset to <out>.dpds/.dpix");
    sim->add_flag("--quiet", sim_quiet, "omit the field text");

    // label
    auto* lab = app.add_subcommand("label", "relabel every record of a dataset and compare with stored targets");
    std::string lab_in, lab_index, lab_scheme;
    bool lab_rows = false;
    lab->add_option("--in", lab_in, "data file (.dpds)")->required();
    lab->add_option("--index", lab_index, "index file (default: data path with .dpix)");
    lab->add_option("--scheme-file", lab_scheme);
    lab->add_flag("--rows", lab_rows, "print one CSV row per record");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a labeled dataset");
    Common gen_c;
    gen_c.add(gen);
    std::string gen_mode = "special", gen_points, gen_out;
    std::size_t gen_count = 0;
    std::optional<std::uint32_t> gen_n_max, gen_t_max;
    bool gen_raw = false;
    gen->add_option("--mode", gen_mode)->check(CLI::IsMember({"special", "random", "test"}));
    gen->add_option("--points", gen_points, "special points, p:q,p:q,...");
    gen->add_option("--count", gen_count, "number of random points");
    gen->add_option("--n-max", gen_n_max, "upper N for random sizes");
    gen->add_option("--t-max", gen_t_max, "upper T for random sizes");
    gen->add_option("--out", gen_out, "output prefix")->required();
    gen->add_flag("--no-compress", gen_raw);

    // reindex
    auto* rex = app.add_subcommand("reindex", "rebuild a sidecar index by scanning record headers");
    std::string rex_in, rex_out;
    rex->add_option("--in", rex_in)->required();
    rex->add_option("--out", rex_out, "index path (default: data path with .dpix)");

    // sweep
    auto* swp = app.add_subcommand("sweep", "pattern probabilities along p at fixed q");
    Common swp_c;
    swp_c.add(swp);
    Range swp_p;
    swp_p.add(swp, "p", 0.0, 1.0, 0.01);
    double swp_q = 0.9;
    std::string swp_out, swp_scores;
    swp->add_option("--q", swp_q);
    swp->add_option("--out", swp_out);
    swp->add_option("--scores", swp_scores, "score table; sweep mean scores instead of simulating");

    // crit-est
    auto* est = app.add_subcommand("crit-est", "critical points from threshold crossings");
    Common est_c;
    est_c.add(est);
    Range est_p;
    est_p.add(est, "p", 0.0, 1.0, 0.01);
    double est_q = 0.9, est_threshold = 0.5;
    std::string est_in, est_scores, est_thresholds, est_out;
    bool est_all = false;
    est->add_option("--q", est_q);
    est->add_option("--in", est_in, "sweep CSV from `sweep`");
    est->add_option("--scores", est_scores, "score table");
    est->add_option("--threshold", est_threshold, "common threshold");
    est->add_option("--thresholds", est_thresholds, "per-pattern thresholds file");
    est->add_option("--out", est_out);
    est->add_flag("--all", est_all, "list every crossing, not only the exit/onset estimate");

    // phase-map
    auto* pm = app.add_subcommand("phase-map", "phase classes over a (p,q) grid");
    Common pm_c;
    pm_c.add(pm);
    Range pm_p, pm_q;
    pm_p.add(pm, "p", 0.0, 1.0, 0.1);
    pm_q.add(pm, "q", 0.0, 1.0, 0.1);
    std::string pm_out, pm_image, pm_scores, pm_thresholds, pm_from;
    pm->add_option("--out", pm_out);
    pm->add_option("--image", pm_image, "PPM raster of the classes");
    pm->add_option("--scores", pm_scores, "score table");
    pm->add_option("--thresholds", pm_thresholds, "per-pattern thresholds file");
    pm->add_option("--from", pm_from, "reclassify a stored phase CSV");

    // bernoulli
    auto* ber = app.add_subcommand("bernoulli", "isotropic Bernoulli control sweep");
    Common ber_c;
    ber_c.add(ber);
    Range ber_pb;
    ber_pb.add(ber, "pb", 0.0, 1.0, 0.05);
    std::string ber_out;
    ber->add_option("--out", ber_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*sim) {
            SimParams sp;
            const auto d = sim_c.dims();
            sp.n_sites = d.n_sites;
            sp.n_steps = d.n_steps;
            sp.init_density = d.init_density;
            sp.p = sim_p;
            sp.q = sim_q;
            sp.seed = sim_c.seed;
            const auto field = simulate(sp);
            const auto target = label_field(field, sim_c.schemes());
            if (!sim_quiet) std::cout << field.to_text();
            std::cout << "label " << target.to_string() << " class " << class_name(class_of(target)) << '\n';
            if (!sim_out.empty()) {
                const auto paths = DatasetPaths::from_prefix(sim_out);
                DatasetWriter w{paths.data, paths.index};
                w.append(field, sp, target);
            }
        } else if (*lab) {
            const fs::path data{lab_in};
            const fs::path index = lab_index.empty() ? fs::path{data}.replace_extension(".dpix") : fs::path{lab_index};
            const auto schemes = lab_scheme.empty() ? PatternSchemes::builtin() : load_scheme_file(lab_scheme);
            const auto idx = read_index(index);
            DatasetReader reader{data};
            std::size_t mismatches = 0;
            if (lab_rows) std::cout << "record,p,q,seed,n_sites,n_rows,stored,computed\n";
            for (std::size_t k = 0; k < idx.size(); ++k) {
                const auto r = reader.read(idx[k]);
                const auto computed = label_field(r.field, schemes);
                mismatches += computed != r.target;
                if (lab_rows) {
                    std::cout << k << ',' << r.params.p << ',' << r.params.q << ',' << r.params.seed << ','
                              << r.field.n_sites() << ',' << r.field.n_rows() << ",\"" << r.target.to_string()
                              << "\",\"" << computed.to_string() << "\"\n";
                }
            }
            std::cout << "records " << idx.size() << ", label mismatches " << mismatches << '\n';
        } else if (*gen) {
            GenerationSpec spec;
            spec.mode = gen_mode == "special"  ? GenerationMode::SpecialPoints
                        : gen_mode == "random" ? GenerationMode::RandomPoints
                                               : GenerationMode::TestSet;
            if (spec.mode == GenerationMode::SpecialPoints) {
                if (gen_points.empty()) throw UsageError("special mode needs --points");
                spec.points = parse_points(gen_points);
            } else if (gen_count == 0) {
                throw UsageError("random and test modes need --count");
            }
            spec.point_count = gen_count;
            spec.systems_per_point = spec.mode == GenerationMode::TestSet ? 1 : gen_c.realizations();
            const auto d = gen_c.dims();
            spec.n_sites = {d.n_sites, gen_n_max.value_or(d.n_sites)};
            spec.n_steps = {d.n_steps, gen_t_max.value_or(d.n_steps)};
            spec.init_density = d.init_density;
            spec.master_seed = gen_c.seed;
            spec.compress = !gen_raw;
            spec.threads = gen_c.threads;
            const auto schemes = gen_c.schemes();
            const auto res =
                generate(spec, gen_out, [&](const SpaceTimeField& f) { return label_field(f, schemes); });
            std::cout << "wrote " << res.index.size() << " records to " << res.paths.data.string() << '\n';
        } else if (*rex) {
            const fs::path data{rex_in};
            const fs::path out = rex_out.empty() ? fs::path{data}.replace_extension(".dpix") : fs::path{rex_out};
            const auto idx = rebuild_index(data);
            write_index(out, idx);
            std::cout << "indexed " << idx.size() << " records\n";
        } else if (*swp) {
            SweepResult s;
            if (!swp_scores.empty()) {
                s = sweep_from_scores(load_score_table(swp_scores), swp_q);
            } else {
                s = sweep_fixed_q(swp_q, swp_p.grid(), swp_c.realizations(), swp_c.dims(), swp_c.seed,
                                  swp_c.schemes(), swp_c.threads);
            }
            Output out{swp_out};
            write_sweep_csv(out.stream(), s);
        } else if (*est) {
            SweepResult s;
            if (!est_in.empty()) {
                std::ifstream in{est_in};
                if (!in) throw DataError("cannot open " + est_in);
                s = read_sweep_csv(in);
            } else if (!est_scores.empty()) {
                s = sweep_from_scores(load_score_table(est_scores), est_q);
            } else {
                s = sweep_fixed_q(est_q, est_p.grid(), est_c.realizations(), est_c.dims(), est_c.seed,
                                  est_c.schemes(), est_c.threads);
            }
            PatternProbs th{};
            th.fill(est_threshold);
            if (!est_thresholds.empty()) th = load_thresholds(est_thresholds);
            Output out{est_out};
            print_estimates(out.stream(), s, th, est_all);
        } else if (*pm) {
            const PatternProbs th = pm_thresholds.empty() ? kDefaultThresholds : load_thresholds(pm_thresholds);
            PhaseMap m;
            if (!pm_from.empty()) {
                std::ifstream in{pm_from};
                if (!in) throw DataError("cannot open " + pm_from);
                m = read_phase_csv(in, th);
            } else if (!pm_scores.empty()) {
                m = phase_map_from_scores(load_score_table(pm_scores), th);
            } else {
                m = phase_map(pm_p.grid(), pm_q.grid(), pm_c.realizations(), pm_c.dims(), th, pm_c.seed,
                              pm_c.schemes(), pm_c.threads);
            }
            Output out{pm_out};
            write_phase_csv(out.stream(), m);
            if (!pm_image.empty()) {
                std::ofstream img{pm_image, std::ios::binary};
                if (!img) throw DataError("cannot write " + pm_image);
                write_phase_ppm(img, m);
            }
        } else if (*ber) {
            const auto s = bernoulli_control(ber_pb.grid(), ber_c.realizations(), ber_c.dims(), ber_c.seed,
                                             ber_c.schemes(), ber_c.threads);
            Output out{ber_out};
            write_sweep_csv(out.stream(), s);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

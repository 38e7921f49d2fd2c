// polmult: command-line front end.
//
//   state       build a polarization sector from a state description
//   decompose   multipole table of a sector
//   measures    W_K, A_K and P_K per block and aggregated
//   tomo        moment tomography: exact, sampled or from a counts file
//   quasi       r-parametrized quasidistribution on a sphere grid
//   directions  measurement direction sets
//   p2-surface  second-order degree of polarization of |S, m>
//
// Exit codes: 0 success, 1 numerical failure, 2 input or schema error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "polmult/angular.hpp"
#include "polmult/io.hpp"
#include "polmult/kernels.hpp"
#include "polmult/multipole.hpp"
#include "polmult/quasi.hpp"
#include "polmult/stokes.hpp"
#include "polmult/tomography.hpp"

namespace {

using namespace polmult;
using io::json;

constexpr std::uint64_t kDefaultSeed = 1;

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
    } else {
        io::write_text_file(path, content);
    }
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

std::uint64_t default_seed() {
    if (const char* env = std::getenv("POLMULT_SEED")) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::logic_error&) {
        }
        throw io::SchemaError(std::string("POLMULT_SEED is not a 64-bit unsigned integer: ") + env);
    }
    return kDefaultSeed;
}

PolarizationSector load_sector(const std::string& path) {
    if (path == "-") return io::load_state(io::parse_json(std::cin, "stdin"));
    return io::load_state(io::read_json_file(path));
}

// --- state -----------------------------------------------------------------

struct StateArgs {
    std::string spec_file, family, out;
    int nh = 0, nv = 0, two_s = -1, n = 1;
    double s = -1, theta = 0, phi = 0, nbar = -1, r = 0, tail = kDefaultTailTol;
    std::vector<double> alpha_h, alpha_v;
};

int run_state(const StateArgs& a) {
    json spec;
    if (!a.spec_file.empty()) {
        if (!a.family.empty()) throw io::SchemaError("state: give either --spec or --family, not both");
        spec = a.spec_file == "-" ? io::parse_json(std::cin, "stdin") : io::read_json_file(a.spec_file);
    } else {
        if (a.family.empty()) throw io::SchemaError("state: --family or --spec is required");
        spec = {{"family", a.family}, {"tail_tol", a.tail}};
        if (a.family == "fock") {
            spec["nh"] = a.nh;
            spec["nv"] = a.nv;
        } else if (a.family == "su2_coherent") {
            if (a.two_s >= 0) spec["two_s"] = a.two_s;
            else if (a.s >= 0) spec["s"] = a.s;
            else throw io::SchemaError("state: su2_coherent needs --two-s or --s");
            spec["theta"] = a.theta;
            spec["phi"] = a.phi;
        } else if (a.family == "quadrature_coherent") {
            if (a.nbar >= 0) {
                spec["nbar"] = a.nbar;
                spec["theta"] = a.theta;
                spec["phi"] = a.phi;
            } else {
                if (a.alpha_h.empty() && a.alpha_v.empty()) throw io::SchemaError("state: quadrature_coherent needs --nbar or --alpha-h/--alpha-v");
                auto cx = [](const std::vector<double>& v) {
                    if (v.empty()) return json::array({0.0, 0.0});
                    if (v.size() != 2) throw io::SchemaError("state: complex amplitudes are given as RE IM");
                    return json::array({v[0], v[1]});
                };
                spec["alpha_h"] = cx(a.alpha_h);
                spec["alpha_v"] = cx(a.alpha_v);
            }
        } else if (a.family == "noon") {
            spec["n"] = a.n;
        } else if (a.family == "tmsv") {
            spec["r"] = a.r;
        } else {
            throw io::SchemaError("state: unknown --family " + a.family);
        }
    }
    const PolarizationSector sector = io::load_state(spec);
    if (sector.truncation().dropped_mass > 0) {
        std::ostringstream os;
        os << "truncated family: dropped probability mass " << sector.truncation().dropped_mass;
        warn(os.str());
    }
    emit(a.out, io::sector_to_json(sector).dump(1) + "\n");
    return 0;
}

// --- decompose ---------------------------------------------------------------

struct DecomposeArgs {
    std::string state, out;
};

int run_decompose(const DecomposeArgs& a) {
    const PolarizationSector sector = load_sector(a.state);
    emit(a.out, io::multipoles_to_json(decompose(sector)).dump(1) + "\n");
    return 0;
}

// --- measures ----------------------------------------------------------------

struct MeasuresArgs {
    std::string state, prefix;
    int k_max = 0;
};

int run_measures(const MeasuresArgs& a) {
    if (a.k_max < 1) throw io::SchemaError("measures: --k-max must be >= 1");
    const PolarizationSector sector = load_sector(a.state);
    const int top = sector.max_spin().two_s;
    int k_max = a.k_max;
    if (k_max > top) {
        warn("--k-max " + std::to_string(k_max) + " exceeds every block (largest 2S = " + std::to_string(top) +
             "); clamped");
        k_max = std::max(top, 1);
    }
    const MeasureReport report = measure_report(decompose(sector), k_max);
    std::ostringstream blocks, aggregate;
    io::write_measures_blocks_csv(blocks, report);
    io::write_measures_aggregate_csv(aggregate, report);
    if (a.prefix.empty()) {
        std::cout << aggregate.str();
    } else {
        io::write_text_file(a.prefix + "_blocks.csv", blocks.str());
        io::write_text_file(a.prefix + "_aggregate.csv", aggregate.str());
        io::write_text_file(a.prefix + ".json", io::measures_to_json(report).dump(1) + "\n");
    }
    return 0;
}

// --- tomo --------------------------------------------------------------------

struct TomoArgs {
    std::string state, counts, truth, directions, report, counts_out, moments_out;
    int l_max = 2;
    std::int64_t shots = -1;
    std::optional<std::uint64_t> seed;
};

int run_tomo(const TomoArgs& a) {
    if (a.state.empty() == a.counts.empty()) throw io::SchemaError("tomo: give exactly one of --state and --counts");
    if (!a.counts.empty() && a.shots >= 0) throw io::SchemaError("tomo: --shots applies to a simulated state, not to --counts");
    if (a.l_max < 1) throw io::SchemaError("tomo: --l-max must be >= 1");

    ReconstructionOptions opt;
    opt.l_max = a.l_max;
    if (!a.directions.empty()) opt.directions = io::directions_from_json(io::read_json_file(a.directions));

    std::optional<PolarizationSector> truth_state;
    if (!a.state.empty()) truth_state = load_sector(a.state);
    if (!a.truth.empty()) truth_state = load_sector(a.truth);

    int top = 0;
    Reconstruction rec;
    std::vector<CountRecord> simulated;
    if (!a.counts.empty()) {
        std::ifstream in(a.counts);
        if (!in) throw io::SchemaError("cannot open " + a.counts);
        const auto records = io::read_counts_jsonl(in);
        for (const auto& r : records) top = std::max(top, r.spin.two_s);
        if (opt.l_max > top) warn("--l-max clamped to the largest block, 2S = " + std::to_string(top));
        rec = reconstruct(records, opt);
    } else {
        top = truth_state->max_spin().two_s;
        if (opt.l_max > top) warn("--l-max clamped to the largest block, 2S = " + std::to_string(top));
        if (a.shots >= 0) {
            const std::uint64_t seed = a.seed ? *a.seed : default_seed();
            const auto per_dir = kernels::omp::simulate_directions(*truth_state, opt.all_directions(), a.shots, seed);
            for (const auto& v : per_dir) simulated.insert(simulated.end(), v.begin(), v.end());
            rec = reconstruct(simulated, opt);
            rec.seed = seed;
        } else {
            rec = reconstruct(*truth_state, opt);
        }
    }

    std::optional<MultipoleTable> truth;
    if (truth_state) truth = decompose(*truth_state);
    const MultipoleTable* truth_ptr = truth ? &*truth : nullptr;

    std::ostringstream table;
    io::write_comparison_table(table, rec, truth_ptr);
    std::cout << table.str();
    if (!a.report.empty()) io::write_text_file(a.report, io::reconstruction_to_json(rec, truth_ptr).dump(1) + "\n");
    if (!a.counts_out.empty()) {
        if (simulated.empty()) throw io::SchemaError("tomo: --counts-out needs sampled mode (--shots)");
        std::ostringstream os;
        io::write_counts_jsonl(os, simulated);
        io::write_text_file(a.counts_out, os.str());
    }
    if (!a.moments_out.empty()) {
        std::vector<MomentRecord> all;
        for (const auto& [s, m] : rec.moments) all.insert(all.end(), m.begin(), m.end());
        std::ostringstream os;
        io::write_moments_csv(os, all);
        io::write_text_file(a.moments_out, os.str());
    }
    return 0;
}

// --- quasi -------------------------------------------------------------------

struct QuasiArgs {
    std::string state, out;
    double r = 0.0;
    int band = -1;
    int two_s = -1;
};

int run_quasi(const QuasiArgs& a) {
    const PolarizationSector sector = load_sector(a.state);
    const MultipoleTable table = decompose(sector);
    const int top = sector.max_spin().two_s;
    const int band = a.band >= 0 ? a.band : 2 * top + 1;
    if (band < 0) throw io::SchemaError("quasi: --band must be non-negative");
    const SphereGrid grid = SphereGrid::for_band_limit(band);

    json header = {{"r", a.r}, {"scheme", grid.scheme}, {"band_limit", band}};
    std::vector<std::string> warnings;
    std::vector<double> values;
    if (a.two_s >= 0 || table.blocks().size() == 1) {
        const Spin s = a.two_s >= 0 ? Spin(a.two_s) : table.blocks().begin()->first;
        if (!table.blocks().count(s)) throw io::SchemaError("quasi: the state has no block with 2S = " + std::to_string(s.two_s));
        const BlockMultipoles& b = table.block(s);
        warnings = quasi_warnings(s, a.r);
        values = kernels::omp::quasi_grid(b, a.r, grid);
        header["view"] = "block";
        header["two_s"] = s.two_s;
        if (band >= 2 * s.two_s) {
            const double integral = localization_integral(b, a.r, grid);
            if (!(integral > 0.0)) throw NumericalError("quasi: integral of W_r^2 is not positive");
            header["integral_quadrature"] = integral;
            header["integral_identity"] = localization_identity(b, a.r);
            header["sigma"] = 1.0 / integral;
        } else {
            warnings.push_back("band limit below 2(2S): localization not computed");
        }
    } else {
        // P_S-weighted sum over blocks, a convenience view only
        header["view"] = "weighted_sum_over_blocks";
        values.assign(grid.size(), 0.0);
        for (const auto& [s, b] : table.blocks()) {
            for (const auto& w : quasi_warnings(s, a.r)) warnings.push_back(w);
            const auto v = kernels::omp::quasi_grid(b, a.r, grid);
            for (std::size_t i = 0; i < v.size(); ++i) values[i] += b.weight * v[i];
        }
    }
    for (const auto& w : warnings) warn(w);
    header["warnings"] = warnings;
    std::ostringstream os;
    io::write_grid_csv(os, header, grid, values);
    emit(a.out, os.str());
    return 0;
}

// --- directions ----------------------------------------------------------------

struct DirectionsArgs {
    int order = 2;
    bool upto = false;
    std::string out;
};

int run_directions(const DirectionsArgs& a) {
    if (a.order < 1) throw io::SchemaError("directions: --order must be >= 1");
    std::vector<std::pair<int, DirectionSet>> sets;
    for (int L = a.upto ? 1 : a.order; L <= a.order; ++L) sets.emplace_back(L, canonical_directions(L));
    emit(a.out, io::directions_to_json(sets).dump(1) + "\n");
    return 0;
}

// --- p2-surface --------------------------------------------------------------

struct P2Args {
    double s_max = 10;
    std::string out, minima;
};

int run_p2_surface(const P2Args& a) {
    if (a.s_max < 1) throw io::SchemaError("p2-surface: --s-max must be >= 1");
    const int two_s_max = static_cast<int>(std::floor(2 * a.s_max + 1e-9));
    std::ostringstream surface, minima;
    surface << "S,m,p2,p2_squared,closed_form\n";
    minima << "S,m_star,closed_form_min,m_grid,p2_grid,closed_form_grid,admissible\n";
    for (int two_s = 2; two_s <= two_s_max; ++two_s) {
        const Spin s(two_s);
        double best = std::numeric_limits<double>::infinity(), best_p2 = 0;
        int best_m2 = 0;
        for (int m2 = two_s; m2 >= -two_s; m2 -= 2) {
            PolarizationSector sector;
            Vector amp = Vector::Zero(s.dim());
            amp(s.index_of(m2)) = 1.0;
            sector.add_block(1.0, DensityBlock::pure(s, amp));
            const double p2 = degree_p(decompose(sector), 2);
            const double closed = closed_form::p2_fock(s, m2);
            surface << io::format_double(s.value()) << ',' << io::format_double(0.5 * m2) << ',' << io::format_double(p2)
                    << ',' << io::format_double(p2 * p2) << ',' << io::format_double(closed) << '\n';
            if (m2 >= 0 && closed < best) {
                best = closed;
                best_p2 = p2;
                best_m2 = m2;
            }
        }
        const double m_star = closed_form::p2_fock_argmin(s);
        const double twice = 2 * m_star;
        const bool admissible = std::abs(twice - std::round(twice)) < 1e-9 && (static_cast<long>(std::round(twice)) - two_s) % 2 == 0;
        minima << io::format_double(s.value()) << ',' << io::format_double(m_star) << ','
               << io::format_double(closed_form::p2_fock_minimum(s)) << ',' << io::format_double(0.5 * best_m2) << ','
               << io::format_double(best_p2) << ',' << io::format_double(best) << ',' << (admissible ? "yes" : "no") << '\n';
    }
    emit(a.out, surface.str());
    if (!a.minima.empty()) io::write_text_file(a.minima, minima.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SU(2) multipoles of quantum polarization: states, measures and Stokes tomography"};
    app.require_subcommand(1);
    std::function<int()> action;

    StateArgs st;
    auto* c_state = app.add_subcommand("state", "Build a polarization sector and write it as JSON");
    c_state->add_option("--spec", st.spec_file, "State description JSON file ('-' for stdin)");
    c_state->add_option("--family", st.family, "fock | su2_coherent | quadrature_coherent | noon | tmsv");
    c_state->add_option("--nh", st.nh, "Photons in H (fock)");
    c_state->add_option("--nv", st.nv, "Photons in V (fock)");
    c_state->add_option("--two-s", st.two_s, "2S (su2_coherent)");
    c_state->add_option("--s", st.s, "S (su2_coherent)");
    c_state->add_option("--theta", st.theta, "Polar angle of the Stokes vector");
    c_state->add_option("--phi", st.phi, "Azimuth of the Stokes vector");
    c_state->add_option("--nbar", st.nbar, "Mean photon number (quadrature_coherent)");
    c_state->add_option("--alpha-h", st.alpha_h, "Amplitude RE IM of mode H")->expected(2);
    c_state->add_option("--alpha-v", st.alpha_v, "Amplitude RE IM of mode V")->expected(2);
    c_state->add_option("--n", st.n, "Photon number (noon)");
    c_state->add_option("--r", st.r, "Squeezing parameter (tmsv)");
    c_state->add_option("--tail", st.tail, "Dropped probability mass allowed for infinite families");
    c_state->add_option("-o,--out", st.out, "Output file (default stdout)");
    c_state->callback([&] { action = [&] { return run_state(st); }; });

    DecomposeArgs dc;
    auto* c_dec = app.add_subcommand("decompose", "Multipole table rho_Kq of a sector");
    c_dec->add_option("--state", dc.state, "Sector or state description JSON")->required();
    c_dec->add_option("-o,--out", dc.out, "Output file (default stdout)");
    c_dec->callback([&] { action = [&] { return run_decompose(dc); }; });

    MeasuresArgs ms;
    auto* c_meas = app.add_subcommand("measures", "W_K, A_K and P_K up to a maximum order");
    c_meas->add_option("--state", ms.state, "Sector or state description JSON")->required();
    c_meas->add_option("--k-max", ms.k_max, "Largest multipole order")->required();
    c_meas->add_option("--prefix", ms.prefix, "Write PREFIX_blocks.csv, PREFIX_aggregate.csv and PREFIX.json");
    c_meas->callback([&] { action = [&] { return run_measures(ms); }; });

    TomoArgs tm;
    std::uint64_t seed_value = 0;
    auto* c_tomo = app.add_subcommand("tomo", "Reconstruct multipoles from Stokes moments");
    c_tomo->add_option("--state", tm.state, "State to measure (exact mode, or sampled with --shots)");
    c_tomo->add_option("--counts", tm.counts, "Count records (JSON lines) to reconstruct from");
    c_tomo->add_option("--truth", tm.truth, "Reference state for comparison in counts mode");
    c_tomo->add_option("--l-max", tm.l_max, "Highest multipole order to reconstruct");
    c_tomo->add_option("--directions", tm.directions, "Direction sets JSON (default: canonical sets)");
    c_tomo->add_option("--shots", tm.shots, "Events per direction (sampled mode)");
    auto* seed_opt = c_tomo->add_option("--seed", seed_value, "RNG seed (default POLMULT_SEED, else 1)");
    c_tomo->add_option("--report", tm.report, "Reconstruction report JSON");
    c_tomo->add_option("--counts-out", tm.counts_out, "Write the simulated count records");
    c_tomo->add_option("--moments-out", tm.moments_out, "Write the moments used, as CSV");
    c_tomo->callback([&] {
        if (seed_opt->count()) tm.seed = seed_value;
        action = [&] { return run_tomo(tm); };
    });

    QuasiArgs qa;
    auto* c_quasi = app.add_subcommand("quasi", "Quasidistribution W_r on a sphere grid");
    c_quasi->add_option("--state", qa.state, "Sector or state description JSON")->required();
    c_quasi->add_option("--r", qa.r, "r = 1 (P), 0 (Wigner), -1 (Q)");
    c_quasi->add_option("--band", qa.band, "Grid band limit (default 2(2S)+1)");
    c_quasi->add_option("--two-s", qa.two_s, "Block to evaluate (default: the only block, else P_S-weighted sum)");
    c_quasi->add_option("-o,--out", qa.out, "Output CSV (default stdout)");
    c_quasi->callback([&] { action = [&] { return run_quasi(qa); }; });

    DirectionsArgs da;
    auto* c_dir = app.add_subcommand("directions", "Measurement directions for an inversion order");
    c_dir->add_option("--order", da.order, "Order L (2L+1 lines)");
    c_dir->add_flag("--upto", da.upto, "Emit every order 1..L");
    c_dir->add_option("-o,--out", da.out, "Output file (default stdout)");
    c_dir->callback([&] { action = [&] { return run_directions(da); }; });

    P2Args pa;
    auto* c_p2 = app.add_subcommand("p2-surface", "P_2 of |S, m> for 1 <= S <= s_max");
    c_p2->add_option("--s-max", pa.s_max, "Largest S");
    c_p2->add_option("-o,--out", pa.out, "Surface CSV (default stdout)");
    c_p2->add_option("--minima", pa.minima, "Per-S minima CSV");
    c_p2->callback([&] { action = [&] { return run_p2_surface(pa); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return action();
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

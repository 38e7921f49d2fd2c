#include "polmult/io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace polmult::io {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw SchemaError(msg); }

const json& need(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) fail(where + ": missing field \"" + key + "\"");
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where + ": expected a number");
    return j.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where + ": expected an integer");
    return j.get<int>();
}

int non_negative(const json& j, const std::string& where) {
    const int v = integer(j, where);
    if (v < 0) fail(where + ": must be non-negative");
    return v;
}

json truncation_to_json(const TruncationNote& t) {
    return {{"tail_tol", t.tail_tol}, {"dropped_mass", t.dropped_mass}};
}

TruncationNote truncation_from_json(const json& j) {
    if (!j.contains("truncation")) return {};
    const json& t = j.at("truncation");
    return {number_or(t, "tail_tol", 0.0, "truncation"), number_or(t, "dropped_mass", 0.0, "truncation")};
}

json m2_labels(Spin s) {
    json out = json::array();
    for (int i = 0; i < s.dim(); ++i) out.push_back(s.m2_at(i));
    return out;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& where) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
        fail(where + ": expected " + std::to_string(rows) + " rows");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            fail(where + ": row " + std::to_string(i) + " must have " + std::to_string(cols) + " entries");
        }
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(row[static_cast<std::size_t>(k)]);
    }
    return m;
}

Spin spin_from_json(const json& j, const std::string& where) {
    return Spin(non_negative(j, where));
}

SphericalDirection direction_from_json(const json& j, const std::string& where) {
    return {number(need(j, "theta", where), where + ".theta"), number(need(j, "phi", where), where + ".phi")};
}

json direction_to_json(const SphericalDirection& d) { return {{"theta", d.theta}, {"phi", d.phi}}; }

std::string csv_double(double v) { return std::isnan(v) ? "nan" : format_double(v); }

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double parse_double(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) fail(where + ": trailing characters in \"" + text + "\"");
        return v;
    } catch (const std::logic_error&) {
        fail(where + ": not a number: \"" + text + "\"");
    }
}

std::int64_t parse_int(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) fail(where + ": trailing characters in \"" + text + "\"");
        return v;
    } catch (const std::logic_error&) {
        fail(where + ": not an integer: \"" + text + "\"");
    }
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        fail("complex number must be [re, im] or a real number");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json sector_to_json(const PolarizationSector& sector) {
    json blocks = json::array();
    for (const auto& [s, wb] : sector.blocks()) {
        blocks.push_back({{"two_s", s.two_s},
                          {"weight", wb.weight},
                          {"m2", m2_labels(s)},
                          {"matrix", matrix_to_json(wb.block.matrix)}});
    }
    return {{"format", kSectorFormat}, {"truncation", truncation_to_json(sector.truncation())}, {"blocks", blocks}};
}

PolarizationSector sector_from_json(const json& j) {
    if (j.contains("format") && j.at("format") != kSectorFormat) {
        fail("sector: unsupported format " + j.at("format").dump());
    }
    const json& blocks = need(j, "blocks", "sector");
    if (!blocks.is_array() || blocks.empty()) fail("sector: \"blocks\" must be a non-empty array");
    PolarizationSector out;
    try {
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const std::string where = "sector.blocks[" + std::to_string(b) + "]";
            const json& blk = blocks[b];
            const Spin s = spin_from_json(need(blk, "two_s", where), where + ".two_s");
            if (blk.contains("m2") && blk.at("m2") != m2_labels(s)) {
                fail(where + ": m2 labels must run 2S, 2S-2, ..., -2S");
            }
            const double w = number(need(blk, "weight", where), where + ".weight");
            const Matrix m = matrix_from_json(need(blk, "matrix", where), s.dim(), s.dim(), where + ".matrix");
            out.add_block(w, DensityBlock{s, m});
        }
        out.set_truncation(truncation_from_json(j));
        out.validate();
    } catch (const SchemaError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail(std::string("sector: ") + e.what());
    }
    return out;
}

StateSpec state_spec_from_json(const json& j) {
    const json& fam = need(j, "family", "state");
    if (!fam.is_string()) fail("state.family must be a string");
    const std::string family = fam.get<std::string>();
    const std::string where = "state(" + family + ")";
    const double tail = number_or(j, "tail_tol", kDefaultTailTol, where);
    if (!(tail > 0.0)) fail(where + ": tail_tol must be positive");

    if (family == "fock") {
        return spec::Fock{non_negative(need(j, "nh", where), where + ".nh"), non_negative(need(j, "nv", where), where + ".nv")};
    }
    if (family == "su2_coherent") {
        int two_s = 0;
        if (j.contains("two_s")) {
            two_s = non_negative(j.at("two_s"), where + ".two_s");
        } else {
            const double s = number(need(j, "s", where), where + ".s");
            if (s < 0 || std::abs(2 * s - std::round(2 * s)) > 1e-12) fail(where + ": s must be a non-negative multiple of 1/2");
            two_s = static_cast<int>(std::lround(2 * s));
        }
        return spec::Su2Coherent{two_s, number_or(j, "theta", 0.0, where), number_or(j, "phi", 0.0, where)};
    }
    if (family == "quadrature_coherent") {
        spec::QuadratureCoherent q;
        q.tail_tol = tail;
        if (j.contains("nbar")) {
            const double nbar = number(j.at("nbar"), where + ".nbar");
            if (nbar < 0) fail(where + ": nbar must be non-negative");
            const double th = number_or(j, "theta", 0.0, where), ph = number_or(j, "phi", 0.0, where);
            q.alpha_h = std::sqrt(nbar) * std::cos(th / 2);
            q.alpha_v = std::sqrt(nbar) * std::polar(1.0, ph) * std::sin(th / 2);
        } else {
            q.alpha_h = complex_from_json(need(j, "alpha_h", where));
            q.alpha_v = complex_from_json(need(j, "alpha_v", where));
        }
        return q;
    }
    if (family == "noon") {
        const int n = non_negative(need(j, "n", where), where + ".n");
        if (n < 1) fail(where + ": n must be >= 1");
        return spec::Noon{n};
    }
    if (family == "tmsv") {
        const double r = number(need(j, "r", where), where + ".r");
        if (r < 0) fail(where + ": r must be non-negative");
        return spec::Tmsv{r, tail};
    }
    if (family == "raw") {
        const json& basis = need(j, "basis", where);
        if (!basis.is_array() || basis.empty()) fail(where + ": basis must be a non-empty array of [nh, nv]");
        RawState raw;
        for (const auto& lab : basis) {
            if (!lab.is_array() || lab.size() != 2) fail(where + ": basis entries are [nh, nv]");
            raw.basis.push_back({non_negative(lab[0], where + ".basis"), non_negative(lab[1], where + ".basis")});
        }
        const auto d = static_cast<Eigen::Index>(raw.basis.size());
        if (j.contains("amplitudes")) {
            const json& amp = j.at("amplitudes");
            if (!amp.is_array() || static_cast<Eigen::Index>(amp.size()) != d) fail(where + ": one amplitude per basis label");
            Vector v(d);
            for (Eigen::Index i = 0; i < d; ++i) v(i) = complex_from_json(amp[static_cast<std::size_t>(i)]);
            return spec::Raw{raw_pure_state(raw.basis, v)};
        }
        raw.matrix = matrix_from_json(need(j, "matrix", where), d, d, where + ".matrix");
        return spec::Raw{raw};
    }
    fail("state: unknown family \"" + family + "\" (expected fock, su2_coherent, quadrature_coherent, noon, tmsv, raw)");
}

PolarizationSector load_state(const json& j) {
    if (j.contains("family")) {
        const StateSpec spec = state_spec_from_json(j);
        try {
            return build_state(spec);
        } catch (const std::invalid_argument& e) {
            fail(std::string("state: ") + e.what());
        }
    }
    return sector_from_json(j);
}

json multipoles_to_json(const MultipoleTable& table) {
    json blocks = json::array();
    for (const auto& [s, b] : table.blocks()) {
        json entries = json::array();
        for (int k = 0; k <= b.k_max(); ++k) {
            for (int q = -k; q <= k; ++q) entries.push_back({{"k", k}, {"q", q}, {"value", complex_to_json(b.at(k, q))}});
        }
        blocks.push_back({{"two_s", s.two_s}, {"weight", b.weight}, {"multipoles", entries}});
    }
    return {{"format", kMultipoleFormat}, {"truncation", truncation_to_json(table.truncation())}, {"blocks", blocks}};
}

MultipoleTable multipoles_from_json(const json& j) {
    if (j.contains("format") && j.at("format") != kMultipoleFormat) {
        fail("multipoles: unsupported format " + j.at("format").dump());
    }
    const json& blocks = need(j, "blocks", "multipoles");
    if (!blocks.is_array()) fail("multipoles: \"blocks\" must be an array");
    MultipoleTable out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string where = "multipoles.blocks[" + std::to_string(i) + "]";
        const json& blk = blocks[i];
        const Spin s = spin_from_json(need(blk, "two_s", where), where + ".two_s");
        BlockMultipoles b = BlockMultipoles::zeros(s, number(need(blk, "weight", where), where + ".weight"));
        for (const auto& e : need(blk, "multipoles", where)) {
            const int k = integer(need(e, "k", where), where + ".k");
            const int q = integer(need(e, "q", where), where + ".q");
            if (k < 0 || k > s.two_s || std::abs(q) > k) fail(where + ": (k, q) out of range");
            b.at(k, q) = complex_from_json(need(e, "value", where));
        }
        try {
            out.add_block(std::move(b));
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }
    out.set_truncation(truncation_from_json(j));
    return out;
}

json directions_to_json(const std::vector<std::pair<int, DirectionSet>>& sets) {
    json arr = json::array();
    for (const auto& [order, set] : sets) {
        json dirs = json::array();
        for (const auto& d : set.directions) {
            const Eigen::Vector3d u = d.unit();
            dirs.push_back({{"theta", d.theta}, {"phi", d.phi}, {"vector", {u.x(), u.y(), u.z()}}});
        }
        arr.push_back({{"order", order},
                       {"label", set.label},
                       {"min_line_angle_deg", min_line_angle(set) * 180.0 / kPi},
                       {"condition_number", design_condition(order, set)},
                       {"directions", dirs}});
    }
    return {{"format", kDirectionsFormat}, {"sets", arr}};
}

std::map<int, DirectionSet> directions_from_json(const json& j) {
    const json& sets = need(j, "sets", "directions");
    if (!sets.is_array()) fail("directions: \"sets\" must be an array");
    std::map<int, DirectionSet> out;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const std::string where = "directions.sets[" + std::to_string(i) + "]";
        const int order = integer(need(sets[i], "order", where), where + ".order");
        if (order < 1) fail(where + ": order must be >= 1");
        DirectionSet set;
        set.label = sets[i].value("label", "file");
        for (const auto& d : need(sets[i], "directions", where)) set.directions.push_back(direction_from_json(d, where));
        if (static_cast<int>(set.size()) < 2 * order + 1) {
            fail(where + ": order " + std::to_string(order) + " needs at least " + std::to_string(2 * order + 1) + " directions");
        }
        if (!out.emplace(order, std::move(set)).second) fail(where + ": duplicate order");
    }
    return out;
}

json measures_to_json(const MeasureReport& report) {
    json degree = json::array();
    for (int k = 1; k <= report.k_max; ++k) degree.push_back({{"k", k}, {"p", report.degree[static_cast<std::size_t>(k)]}});
    json blocks = json::array();
    json* current = nullptr;
    for (const auto& row : report.rows) {
        if (!current || (*current)["two_s"] != row.spin.two_s) {
            blocks.push_back({{"two_s", row.spin.two_s}, {"weight", row.weight}, {"rows", json::array()}});
            current = &blocks.back();
        }
        json r = {{"k", row.k}, {"w", row.w}, {"p_contribution", row.p_contribution}};
        r["a"] = std::isnan(row.a) ? json(nullptr) : json(row.a);
        r["a_max"] = std::isnan(row.a_max) ? json(nullptr) : json(row.a_max);
        (*current)["rows"].push_back(std::move(r));
    }
    return {{"format", kMeasuresFormat},
            {"k_max", report.k_max},
            {"tail_bound", report.tail_bound},
            {"w_aggregate", report.w_aggregate},
            {"degree", degree},
            {"blocks", blocks}};
}

void write_measures_blocks_csv(std::ostream& os, const MeasureReport& report) {
    os << "S,K,W,A,A_max,P_contribution\n";
    for (const auto& r : report.rows) {
        os << csv_double(r.spin.value()) << ',' << r.k << ',' << csv_double(r.w) << ',' << csv_double(r.a) << ','
           << csv_double(r.a_max) << ',' << csv_double(r.p_contribution) << '\n';
    }
}

void write_measures_aggregate_csv(std::ostream& os, const MeasureReport& report) {
    os << "K,W,P\n";
    for (int k = 0; k <= report.k_max; ++k) {
        os << k << ',' << csv_double(report.w_aggregate[static_cast<std::size_t>(k)]) << ','
           << csv_double(report.degree[static_cast<std::size_t>(k)]) << '\n';
    }
}

json count_record_to_json(const CountRecord& rec) {
    json counts = json::object();
    for (const auto& [m2, c] : rec.counts) counts[std::to_string(m2)] = c;
    return {{"direction", direction_to_json(rec.direction)}, {"spin2", rec.spin.two_s}, {"counts", counts}};
}

CountRecord count_record_from_json(const json& j) {
    CountRecord rec;
    rec.direction = direction_from_json(need(j, "direction", "counts"), "counts.direction");
    rec.spin = spin_from_json(need(j, "spin2", "counts"), "counts.spin2");
    const json& counts = need(j, "counts", "counts");
    if (!counts.is_object()) fail("counts.counts must be an object {m2: count}");
    for (const auto& [key, value] : counts.items()) {
        const auto m2 = static_cast<int>(parse_int(key, "counts.counts key"));
        if (!rec.spin.admits(m2)) fail("counts: outcome m2=" + key + " impossible for spin2=" + std::to_string(rec.spin.two_s));
        if (!value.is_number_integer() || value.get<std::int64_t>() < 0) fail("counts: counts must be non-negative integers");
        rec.counts[m2] = value.get<std::int64_t>();
    }
    return rec;
}

void write_counts_jsonl(std::ostream& os, const std::vector<CountRecord>& records) {
    for (const auto& r : records) os << count_record_to_json(r).dump() << '\n';
}

std::vector<CountRecord> read_counts_jsonl(std::istream& is) {
    std::vector<CountRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            fail("counts line " + std::to_string(lineno) + ": " + e.what());
        }
        out.push_back(count_record_from_json(j));
    }
    if (out.empty()) fail("counts: file holds no records");
    return out;
}

void write_moments_csv(std::ostream& os, const std::vector<MomentRecord>& moments) {
    os << "theta,phi,ell,mu,stderr,shots\n";
    for (const auto& m : moments) {
        os << format_double(m.direction.theta) << ',' << format_double(m.direction.phi) << ',' << m.ell << ','
           << format_double(m.value) << ',' << format_double(m.std_error) << ',' << m.shots << '\n';
    }
}

std::vector<MomentRecord> read_moments_csv(std::istream& is) {
    std::vector<MomentRecord> out;
    std::string line;
    if (!std::getline(is, line) || line.rfind("theta,phi,ell,mu,stderr,shots", 0) != 0) {
        fail("moments: header must be theta,phi,ell,mu,stderr,shots");
    }
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        const std::string where = "moments line " + std::to_string(lineno);
        if (cells.size() != 6) fail(where + ": expected 6 columns");
        MomentRecord m;
        m.direction = {parse_double(cells[0], where), parse_double(cells[1], where)};
        m.ell = static_cast<int>(parse_int(cells[2], where));
        m.value = parse_double(cells[3], where);
        m.std_error = parse_double(cells[4], where);
        m.shots = parse_int(cells[5], where);
        if (m.ell < 0 || m.std_error < 0 || m.shots < 0) fail(where + ": ell, stderr and shots must be non-negative");
        out.push_back(m);
    }
    return out;
}

json reconstruction_to_json(const Reconstruction& rec, const MultipoleTable* truth) {
    json blocks = json::array();
    double worst = 0.0;
    for (const auto& [s, b] : rec.table.blocks()) {
        const BlockMultipoles* t = nullptr;
        if (truth && truth->blocks().count(s)) t = &truth->block(s);
        const auto err = rec.std_errors.find(s);
        json entries = json::array();
        for (int k = 0; k <= b.k_max(); ++k) {
            for (int q = -k; q <= k; ++q) {
                json e = {{"k", k}, {"q", q}, {"value", complex_to_json(b.at(k, q))}};
                const auto f = static_cast<std::size_t>(MultipoleIndex::flat(k, q));
                if (err != rec.std_errors.end()) e["stderr"] = complex_to_json(err->second[f]);
                if (t) {
                    e["truth"] = complex_to_json(t->at(k, q));
                    if (k <= rec.order_reached.at(s)) worst = std::max(worst, std::abs(t->at(k, q) - b.at(k, q)));
                }
                entries.push_back(std::move(e));
            }
        }
        json moments = json::array();
        if (auto it = rec.moments.find(s); it != rec.moments.end()) {
            for (const auto& m : it->second) {
                moments.push_back({{"theta", m.direction.theta},
                                   {"phi", m.direction.phi},
                                   {"ell", m.ell},
                                   {"mu", m.value},
                                   {"stderr", m.std_error},
                                   {"shots", m.shots}});
            }
        }
        blocks.push_back({{"two_s", s.two_s},
                          {"weight", b.weight},
                          {"order_reached", rec.order_reached.at(s)},
                          {"multipoles", entries},
                          {"moments", moments}});
    }
    json diags = json::array();
    for (const auto& d : rec.diagnostics) {
        diags.push_back({{"two_s", d.spin.two_s},
                         {"order", d.order},
                         {"directions", d.label},
                         {"condition_number", d.condition_number},
                         {"max_residual", d.max_residual}});
    }
    json out = {{"format", kReconstructionFormat},
                {"seed", rec.seed ? json(*rec.seed) : json(nullptr)},
                {"blocks", blocks},
                {"diagnostics", diags},
                {"table", multipoles_to_json(rec.table)}};
    if (truth) out["max_abs_error"] = worst;
    return out;
}

void write_comparison_table(std::ostream& os, const Reconstruction& rec, const MultipoleTable* truth) {
    auto cell = [](Complex z) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%9.4f %+9.4fi", z.real() == 0.0 ? 0.0 : z.real(), z.imag() == 0.0 ? 0.0 : z.imag());
        return std::string(buf);
    };
    for (const auto& [s, b] : rec.table.blocks()) {
        const BlockMultipoles* t = (truth && truth->blocks().count(s)) ? &truth->block(s) : nullptr;
        const auto err = rec.std_errors.find(s);
        char head[128];
        std::snprintf(head, sizeof head, "S = %s  weight = %.6f  orders reconstructed: 1..%d\n", to_string(s).c_str(),
                      b.weight, rec.order_reached.at(s));
        os << head;
        os << "   K    q  " << (t ? "       theory          " : "") << "   reconstructed      "
           << (err != rec.std_errors.end() ? "     std error" : "") << '\n';
        for (int k = 0; k <= rec.order_reached.at(s); ++k) {
            for (int q = -k; q <= k; ++q) {
                char idx[32];
                std::snprintf(idx, sizeof idx, "%4d %4d  ", k, q);
                os << idx;
                if (t) os << cell(t->at(k, q)) << "   ";
                os << cell(b.at(k, q));
                if (err != rec.std_errors.end()) {
                    os << "   " << cell(err->second[static_cast<std::size_t>(MultipoleIndex::flat(k, q))]);
                }
                os << '\n';
            }
        }
    }
}

void write_grid_csv(std::ostream& os, const json& header, const SphereGrid& grid, const std::vector<double>& values) {
    if (values.size() != grid.size()) throw std::invalid_argument("write_grid_csv: one value per node required");
    os << "# " << header.dump() << '\n' << "theta,phi,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        const SphericalDirection d = grid.node(i);
        os << format_double(d.theta) << ',' << format_double(d.phi) << ',' << format_double(values[i]) << '\n';
    }
}

json parse_json(std::istream& is, const std::string& what) {
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        fail(what + ": invalid JSON: " + e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path);
    return parse_json(in, path);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("error while writing " + path);
}

}  // namespace polmult::io

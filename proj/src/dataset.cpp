#include "liverpanel/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "liverpanel/errors.hpp"
#include "liverpanel/rng.hpp"

namespace liverpanel {

namespace {

constexpr std::array<std::string_view, 4> kNames = {"ALT", "AST", "BD", "BT"};

std::string to_upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

std::optional<double> parse_double(std::string_view cell) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return value;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Cholesky with a semidefinite tolerance; returns false when the matrix has a
// genuinely negative direction.
bool cholesky4(const std::array<std::array<double, 4>, 4>& m,
               std::array<std::array<double, 4>, 4>& lower) {
    for (auto& row : lower) row.fill(0.0);
    for (int i = 0; i < 4; ++i) {
        double d = m[i][i];
        for (int k = 0; k < i; ++k) d -= lower[i][k] * lower[i][k];
        if (d < -1e-10) return false;
        lower[i][i] = std::sqrt(std::max(d, 0.0));
        for (int j = i + 1; j < 4; ++j) {
            double off = m[j][i];
            for (int k = 0; k < i; ++k) off -= lower[j][k] * lower[i][k];
            if (lower[i][i] > 1e-12) {
                lower[j][i] = off / lower[i][i];
            } else if (std::abs(off) > 1e-8) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

std::string_view analyte_name(Analyte a) { return kNames[static_cast<int>(a)]; }

std::optional<Analyte> analyte_from_name(std::string_view name) {
    const std::string upper = to_upper(trim(name));
    for (int i = 0; i < 4; ++i) {
        if (upper == kNames[i]) return static_cast<Analyte>(i);
    }
    return std::nullopt;
}

double PanelRecord::value(Analyte a) const {
    switch (a) {
        case Analyte::alt: return alt;
        case Analyte::ast: return ast;
        case Analyte::bd: return bd;
        case Analyte::bt: return bt;
    }
    return 0.0;
}

Dataset::Dataset(std::vector<PanelRecord> records, Analyte target, std::string provenance)
    : records_(std::move(records)), target_(target), provenance_(std::move(provenance)) {
    if (records_.empty()) throw EmptyDataset();
    for (const PanelRecord& r : records_) {
        for (Analyte a : kAnalytes) {
            const double v = r.value(a);
            if (!std::isfinite(v) || v < 0.0) {
                throw Error(std::string("record holds invalid ") + std::string(analyte_name(a)) +
                            " value");
            }
        }
    }
    int slot = 0;
    for (Analyte a : kAnalytes) {
        if (a != target_) features_[slot++] = a;
    }
}

FeatureVector Dataset::feature_row(std::size_t i) const {
    const PanelRecord& r = records_[i];
    return {r.value(features_[0]), r.value(features_[1]), r.value(features_[2])};
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    std::vector<PanelRecord> picked;
    picked.reserve(indices.size());
    for (std::size_t i : indices) picked.push_back(records_[i]);
    return Dataset(std::move(picked), target_, provenance_);
}

ReferenceRanges ReferenceRanges::defaults() {
    ReferenceRanges r;
    r.by_analyte[static_cast<int>(Analyte::alt)] = {10.0, 40.0};
    r.by_analyte[static_cast<int>(Analyte::ast)] = {10.0, 34.0};
    r.by_analyte[static_cast<int>(Analyte::bd)] = {0.0, 0.3};
    r.by_analyte[static_cast<int>(Analyte::bt)] = {0.3, 1.9};
    return r;
}

void ReferenceRanges::validate() const {
    for (Analyte a : kAnalytes) {
        const Interval& iv = by_analyte[static_cast<int>(a)];
        if (!(iv.low < iv.high)) {
            throw InvalidBounds(std::string(analyte_name(a)) + " reference range low >= high");
        }
    }
}

std::vector<std::size_t> FoldPlan::fold_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::complement_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != fold) out.push_back(i);
    }
    return out;
}

Calibration Calibration::defaults() {
    Calibration c;
    // Bounds are sanity rails, not distribution shape: minima sit at assay
    // detection floors, maxima leave room for extreme pathology.
    c.analytes[static_cast<int>(Analyte::alt)] = {6.0, 2708.0, std::log(25.0), 0.55};
    c.analytes[static_cast<int>(Analyte::ast)] = {3.0, 4202.0, std::log(24.0), 0.55};
    c.analytes[static_cast<int>(Analyte::bd)] = {0.01, 46.388, std::log(0.15), 0.6};
    c.analytes[static_cast<int>(Analyte::bt)] = {0.01, 44.593, std::log(0.8), 0.6};

    for (auto& row : c.correlation) row.fill(0.4);
    for (int i = 0; i < 4; ++i) c.correlation[i][i] = 1.0;
    const int alt = static_cast<int>(Analyte::alt);
    const int ast = static_cast<int>(Analyte::ast);
    const int bd = static_cast<int>(Analyte::bd);
    const int bt = static_cast<int>(Analyte::bt);
    c.correlation[alt][ast] = c.correlation[ast][alt] = 0.7;
    c.correlation[bd][bt] = c.correlation[bt][bd] = 0.95;
    return c;
}

void Calibration::validate() const {
    for (Analyte a : kAnalytes) {
        const AnalyteCalibration& ac = analytes[static_cast<int>(a)];
        if (!(ac.min < ac.max)) {
            throw InvalidBounds(std::string(analyte_name(a)) + " min >= max");
        }
        if (ac.min < 0.0 || !std::isfinite(ac.min) || !std::isfinite(ac.max)) {
            throw InvalidBounds(std::string(analyte_name(a)) + " bounds must be finite and >= 0");
        }
        if (!(ac.log_sd > 0.0) || !std::isfinite(ac.log_mean)) {
            throw InvalidBounds(std::string(analyte_name(a)) + " log-scale parameters invalid");
        }
    }
    for (int i = 0; i < 4; ++i) {
        if (std::abs(correlation[i][i] - 1.0) > 1e-12) throw NotPositiveSemidefinite();
        for (int j = 0; j < 4; ++j) {
            if (std::abs(correlation[i][j]) > 1.0 + 1e-12) {
                throw InvalidBounds("correlation entry outside [-1, 1]");
            }
            if (std::abs(correlation[i][j] - correlation[j][i]) > 1e-12) {
                throw NotPositiveSemidefinite();
            }
        }
    }
    std::array<std::array<double, 4>, 4> lower;
    if (!cholesky4(correlation, lower)) throw NotPositiveSemidefinite();
}

Dataset parse_csv(std::string_view text, Analyte target, std::string provenance) {
    // Strip a UTF-8 BOM if present.
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t pos = text.find('\n', start);
        if (pos == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }

    if (lines.empty() || trim(lines[0]).empty()) {
        throw Error("missing header row");
    }

    // Map header position -> analyte.
    const auto header_cells = split_csv_line(lines[0]);
    std::array<int, 4> column_of;  // analyte index -> cell position
    column_of.fill(-1);
    for (std::size_t c = 0; c < header_cells.size(); ++c) {
        const auto a = analyte_from_name(header_cells[c]);
        if (!a) {
            throw Error("unexpected column '" + std::string(header_cells[c]) + "' in header");
        }
        if (column_of[static_cast<int>(*a)] != -1) {
            throw Error("duplicate column '" + std::string(analyte_name(*a)) + "' in header");
        }
        column_of[static_cast<int>(*a)] = static_cast<int>(c);
    }
    for (Analyte a : kAnalytes) {
        if (column_of[static_cast<int>(a)] == -1) {
            throw MissingColumn(std::string(analyte_name(a)));
        }
    }

    std::vector<PanelRecord> records;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (trim(lines[li]).empty()) continue;
        const std::size_t file_line = li + 1;
        const auto cells = split_csv_line(lines[li]);
        if (cells.size() != header_cells.size()) {
            throw ParseError(file_line, "-",
                             "expected " + std::to_string(header_cells.size()) + " cells, got " +
                                 std::to_string(cells.size()));
        }
        PanelRecord rec;
        for (Analyte a : kAnalytes) {
            const std::string_view cell = cells[column_of[static_cast<int>(a)]];
            const auto parsed = parse_double(cell);
            const std::string column(analyte_name(a));
            if (!parsed) {
                throw ParseError(file_line, column, "not a decimal number: '" + std::string(cell) + "'");
            }
            if (!std::isfinite(*parsed)) {
                throw ParseError(file_line, column, "value is not finite");
            }
            if (*parsed < 0.0) {
                throw ParseError(file_line, column, "negative value");
            }
            switch (a) {
                case Analyte::alt: rec.alt = *parsed; break;
                case Analyte::ast: rec.ast = *parsed; break;
                case Analyte::bd: rec.bd = *parsed; break;
                case Analyte::bt: rec.bt = *parsed; break;
            }
        }
        records.push_back(rec);
    }
    if (records.empty()) throw EmptyDataset();
    return Dataset(std::move(records), target, std::move(provenance));
}

Dataset load_csv(const std::filesystem::path& path, Analyte target) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), target, path.string());
}

std::string to_csv(const Dataset& d) {
    std::string out = "ALT,AST,BD,BT\n";
    for (const PanelRecord& r : d.records()) {
        out += format_value(r.alt);
        out += ',';
        out += format_value(r.ast);
        out += ',';
        out += format_value(r.bd);
        out += ',';
        out += format_value(r.bt);
        out += '\n';
    }
    return out;
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path.string());
    out << to_csv(d);
    if (!out) throw Error("write failed: " + path.string());
}

Dataset synthesize(std::size_t n, std::uint64_t seed, const Calibration& cal, Analyte target) {
    if (n < 1) throw Error("synthesize needs n >= 1");
    cal.validate();

    std::array<std::array<double, 4>, 4> lower;
    if (!cholesky4(cal.correlation, lower)) throw NotPositiveSemidefinite();

    rng::Engine gen(seed);
    rng::NormalStream normals(gen);

    std::vector<PanelRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, 4> z;
        for (double& v : z) v = normals.next();
        PanelRecord rec;
        for (int a = 0; a < 4; ++a) {
            double w = 0.0;
            for (int k = 0; k <= a; ++k) w += lower[a][k] * z[k];
            const AnalyteCalibration& ac = cal.analytes[a];
            const double raw = std::exp(ac.log_mean + ac.log_sd * w);
            const double clipped = std::clamp(raw, ac.min, ac.max);
            switch (static_cast<Analyte>(a)) {
                case Analyte::alt: rec.alt = clipped; break;
                case Analyte::ast: rec.ast = clipped; break;
                case Analyte::bd: rec.bd = clipped; break;
                case Analyte::bt: rec.bt = clipped; break;
            }
        }
        records.push_back(rec);
    }
    std::string provenance = "synth(n=" + std::to_string(n) + ",seed=" + std::to_string(seed) + ")";
    return Dataset(std::move(records), target, std::move(provenance));
}

std::array<AnalyteSummary, 4> summarize(const Dataset& d) {
    std::array<AnalyteSummary, 4> out;
    const double n = static_cast<double>(d.size());
    for (Analyte a : kAnalytes) {
        AnalyteSummary& s = out[static_cast<int>(a)];
        s.min = d.records()[0].value(a);
        s.max = s.min;
        double sum = 0.0;
        for (const PanelRecord& r : d.records()) {
            const double v = r.value(a);
            s.min = std::min(s.min, v);
            s.max = std::max(s.max, v);
            sum += v;
        }
        s.mean = sum / n;
        double ss = 0.0;
        for (const PanelRecord& r : d.records()) {
            const double dv = r.value(a) - s.mean;
            ss += dv * dv;
        }
        s.stddev = std::sqrt(ss / n);
    }
    return out;
}

std::vector<bool> flag_out_of_range(const Dataset& d, const ReferenceRanges& r) {
    r.validate();
    std::vector<bool> flags;
    flags.reserve(d.size());
    for (const PanelRecord& rec : d.records()) {
        bool flagged = false;
        for (Analyte a : kAnalytes) {
            const auto& iv = r.by_analyte[static_cast<int>(a)];
            const double v = rec.value(a);
            if (v < iv.low || v > iv.high) {
                flagged = true;
                break;
            }
        }
        flags.push_back(flagged);
    }
    return flags;
}

FoldPlan make_folds(const Dataset& d, int k, std::uint64_t seed) {
    const std::size_t n = d.size();
    if (k < 2 || static_cast<std::size_t>(k) > n) {
        throw KTooLarge("need 2 <= k <= " + std::to_string(n) + ", got " + std::to_string(k));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng::Engine gen(seed);
    rng::shuffle(order, gen);

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos) {
        plan.assignments[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
    }
    return plan;
}

SynthConfig parse_synth_config(std::string_view text) {
    SynthConfig cfg;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start <= text.size()) {
        std::size_t pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        std::string_view line = text.substr(start, pos - start);
        start = pos + 1;
        ++line_no;

        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = to_upper(trim(line.substr(0, eq)));
        const std::string_view value_text = trim(line.substr(eq + 1));
        const auto value = parse_double(value_text);
        if (!value) {
            throw ConfigError("line " + std::to_string(line_no) + ": bad number '" +
                              std::string(value_text) + "'");
        }

        if (key == "SEED") {
            if (*value < 0 || *value != std::floor(*value)) {
                throw ConfigError("seed must be a non-negative integer");
            }
            cfg.seed = static_cast<std::uint64_t>(*value);
            continue;
        }
        if (key == "N") {
            if (*value < 1 || *value != std::floor(*value)) {
                throw ConfigError("n must be a positive integer");
            }
            cfg.n = static_cast<std::size_t>(*value);
            continue;
        }
        if (key.rfind("CORR.", 0) == 0) {
            const std::string rest = key.substr(5);
            const std::size_t dot = rest.find('.');
            if (dot == std::string::npos) {
                throw ConfigError("corr key must be corr.<analyte>.<analyte>");
            }
            const auto a = analyte_from_name(rest.substr(0, dot));
            const auto b = analyte_from_name(rest.substr(dot + 1));
            if (!a || !b || *a == *b) {
                throw ConfigError("bad correlation key '" + key + "'");
            }
            cfg.calibration.correlation[static_cast<int>(*a)][static_cast<int>(*b)] = *value;
            cfg.calibration.correlation[static_cast<int>(*b)][static_cast<int>(*a)] = *value;
            continue;
        }
        const std::size_t dot = key.find('.');
        if (dot == std::string::npos) {
            throw ConfigError("unknown key '" + key + "'");
        }
        const auto a = analyte_from_name(key.substr(0, dot));
        if (!a) throw ConfigError("unknown analyte in key '" + key + "'");
        AnalyteCalibration& ac = cfg.calibration.analytes[static_cast<int>(*a)];
        const std::string field = key.substr(dot + 1);
        if (field == "MIN") {
            ac.min = *value;
        } else if (field == "MAX") {
            ac.max = *value;
        } else if (field == "LOG_MEAN") {
            ac.log_mean = *value;
        } else if (field == "LOG_SD") {
            ac.log_sd = *value;
        } else {
            throw ConfigError("unknown field '" + field + "' in key '" + key + "'");
        }
    }
    return cfg;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_synth_config(buf.str());
}

}  // namespace liverpanel

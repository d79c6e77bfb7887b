// liverpanel: synthesize liver-panel data, benchmark learners, inspect trees.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 benchmark finished
// with at least one failed learner row.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "liverpanel/errors.hpp"
#include "liverpanel/harness.hpp"
#include "liverpanel/learners.hpp"

namespace lp = liverpanel;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPartialFailure = 3;

struct DataSource {
    std::string input;
    bool synth = false;
    std::optional<std::size_t> n;          // flag beats config beats 16380
    std::optional<std::uint64_t> synth_seed;  // flag beats config beats 1
    std::string config;
};

void add_source_flags(CLI::App* cmd, DataSource& src) {
    cmd->add_option("--input", src.input, "CSV file with ALT,AST,BD,BT columns");
    cmd->add_flag("--synth", src.synth, "generate the dataset instead of reading a file");
    cmd->add_option("--n", src.n, "records to synthesize")->default_str("16380");
    cmd->add_option("--synth-seed", src.synth_seed, "synthesis seed")->default_str("1");
    cmd->add_option("--config", src.config, "synthesis config file (key = value lines)");
}

lp::Analyte parse_target(const std::string& name) {
    const auto a = lp::analyte_from_name(name);
    if (!a) throw lp::ConfigError("unknown analyte '" + name + "'; use ALT, AST, BD or BT");
    return *a;
}

lp::Dataset resolve_source(const DataSource& src, lp::Analyte target) {
    if (src.input.empty() == !src.synth) {
        throw lp::ConfigError("exactly one data source required: --input FILE or --synth");
    }
    if (!src.input.empty()) return lp::load_csv(src.input, target);

    lp::SynthConfig cfg;
    if (!src.config.empty()) cfg = lp::load_synth_config(src.config);
    // Flags win over the config file's seed/n.
    const std::size_t n = src.n ? *src.n : cfg.n.value_or(16380);
    const std::uint64_t seed = src.synth_seed ? *src.synth_seed : cfg.seed.value_or(1);
    if (n == 0) throw lp::ConfigError("--n must be positive");
    return lp::synthesize(n, seed, cfg.calibration, target);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw lp::Error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw lp::Error("failed writing " + path.string());
}

std::string format_cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%10.4g", v);
    return buf;
}

void print_summary(const lp::Dataset& d) {
    const auto summary = lp::summarize(d);
    std::printf("%-5s%10s%10s%10s%10s\n", "", "min", "max", "mean", "stddev");
    for (std::size_t a = 0; a < 4; ++a) {
        const auto& s = summary[a];
        std::printf("%-5s%s%s%s%s\n",
                    std::string(lp::analyte_name(static_cast<lp::Analyte>(a))).c_str(),
                    format_cell(s.min).c_str(), format_cell(s.max).c_str(),
                    format_cell(s.mean).c_str(), format_cell(s.stddev).c_str());
    }
}

int cmd_synth(const DataSource& src, const std::string& out_path) {
    DataSource source = src;
    source.synth = true;
    if (!source.input.empty()) throw lp::ConfigError("synth generates data; --input is not valid");
    const lp::Dataset d = resolve_source(source, lp::Analyte::bt);
    lp::write_csv(d, out_path);
    std::printf("Wrote %zu records to %s (%s)\n\n", d.size(), out_path.c_str(),
                d.provenance().c_str());
    print_summary(d);
    return kExitOk;
}

int cmd_bench(const DataSource& src, const std::string& target_name,
              const std::vector<std::string>& learner_names, int folds, std::uint64_t seed,
              const lp::SuiteOptions& opts, const std::string& out_text,
              const std::string& out_csv) {
    const lp::Analyte target = parse_target(target_name);
    std::vector<lp::LearnerSpec> learners;
    if (learner_names.empty()) {
        learners = lp::default_suite(opts);
    } else {
        for (const std::string& name : learner_names) learners.push_back(lp::make_learner(name, opts));
    }

    const lp::Dataset d = resolve_source(src, target);
    const lp::EvaluationReport report = lp::run_benchmark(d, learners, folds, seed);

    const std::string text = lp::render_text(report);
    std::fputs(text.c_str(), stdout);
    if (!out_text.empty()) write_file(out_text, text);
    if (!out_csv.empty()) write_file(out_csv, lp::render_csv(report));

    for (const lp::ReportRow& row : report.rows) {
        std::fprintf(stderr, "# %s: %.3fs\n", row.key.c_str(), row.seconds);
    }
    return report.any_failure() ? kExitPartialFailure : kExitOk;
}

int cmd_correlate(const DataSource& src, const std::string& scatter_dir) {
    const lp::Dataset d = resolve_source(src, lp::Analyte::bt);
    const lp::CorrelationResult result = lp::correlate(d);
    std::fputs(lp::render_correlation_text(result).c_str(), stdout);

    bool degenerate = false;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            if (!result.matrix[a][b]) degenerate = true;
        }
    }
    if (degenerate) std::fputs("warning: constant column, some cells are n/a\n", stderr);

    if (!scatter_dir.empty()) {
        std::filesystem::create_directories(scatter_dir);
        for (int a = 0; a < 4; ++a) {
            for (int b = a + 1; b < 4; ++b) {
                const std::string xa(lp::analyte_name(static_cast<lp::Analyte>(a)));
                const std::string xb(lp::analyte_name(static_cast<lp::Analyte>(b)));
                std::string content = xa + "," + xb + "\n";
                for (const lp::PanelRecord& rec : d.records()) {
                    char buf[80];
                    std::snprintf(buf, sizeof(buf), "%.6g,%.6g\n",
                                  rec.value(static_cast<lp::Analyte>(a)),
                                  rec.value(static_cast<lp::Analyte>(b)));
                    content += buf;
                }
                write_file(std::filesystem::path(scatter_dir) / (xa + "_" + xb + ".csv"), content);
            }
        }
    }
    return kExitOk;
}

// Classes are records whose features sit inside their reference ranges,
// partitioned by where the target falls (below / in / above its range);
// records with any out-of-range feature form the outlier set.
int cmd_knsc(const DataSource& src, const std::string& target_name, const std::string& query_csv,
             std::size_t k) {
    const lp::Analyte target = parse_target(target_name);
    const lp::Dataset d = resolve_source(src, target);
    const lp::ReferenceRanges ranges = lp::ReferenceRanges::defaults();

    lp::PanelRecord query{};
    {
        std::vector<double> values;
        std::string cell;
        std::stringstream ss(query_csv);
        while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
        if (values.size() != 4) {
            throw lp::ConfigError("--query needs 4 comma-separated values (ALT,AST,BD,BT)");
        }
        query = {values[0], values[1], values[2], values[3]};
    }

    const auto& interval = ranges.by_analyte[static_cast<int>(target)];
    std::vector<lp::PointSet> classes(3);
    const std::vector<std::string> labels = {"below range", "in range", "above range"};
    lp::PointSet outliers;

    for (std::size_t i = 0; i < d.size(); ++i) {
        const lp::FeatureVector f = d.feature_row(i);
        bool feature_outlier = false;
        for (int fi = 0; fi < 3; ++fi) {
            const auto& r = ranges.by_analyte[static_cast<int>(d.features()[fi])];
            if (f[fi] < r.low || f[fi] > r.high) feature_outlier = true;
        }
        const lp::Point p{f[0], f[1], f[2]};
        if (feature_outlier) {
            outliers.push_back(p);
            continue;
        }
        const double t = d.target_value(i);
        classes[t < interval.low ? 0 : (t > interval.high ? 2 : 1)].push_back(p);
    }

    lp::FeatureVector qf{};
    for (int fi = 0; fi < 3; ++fi) qf[fi] = query.value(d.features()[fi]);
    const lp::Point q{qf[0], qf[1], qf[2]};

    const double score = lp::knsc(q, classes, labels, outliers, k);
    std::printf("k-NSC (k=%zu, target %s): %.6f\n", k,
                std::string(lp::analyte_name(target)).c_str(), score);
    for (std::size_t c = 0; c < classes.size(); ++c) {
        std::printf("  class '%s': %zu records\n", labels[c].c_str(), classes[c].size());
    }
    std::printf("  outliers (feature out of range): %zu records\n", outliers.size());
    return kExitOk;
}

int cmd_inspect(const DataSource& src, const std::string& target_name, const std::string& learner,
                std::uint64_t seed, const lp::TreeConfig& base_cfg) {
    const lp::Analyte target = parse_target(target_name);
    const lp::Dataset d = resolve_source(src, target);
    lp::TreeConfig cfg = base_cfg;
    cfg.seed = seed;

    lp::ModelTree tree;
    if (learner == "reptree") {
        tree = lp::fit_reptree(d, cfg);
    } else if (learner == "m5p") {
        tree = lp::fit_m5(d, cfg);
    } else {
        throw lp::ConfigError("inspect supports learners: reptree, m5p");
    }
    std::printf("%s on %s, target %s, seed %llu\n\n", learner.c_str(), d.provenance().c_str(),
                std::string(lp::analyte_name(target)).c_str(),
                static_cast<unsigned long long>(seed));
    std::fputs(lp::tree_to_text(tree, d.features()).c_str(), stdout);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"liver-panel analyte prediction toolkit"};
    app.require_subcommand(1);

    DataSource src;
    std::string target_name = "BT";
    std::uint64_t seed = 1;

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset CSV");
    std::string synth_out = "synth.csv";
    synth->add_option("--n", src.n, "records to synthesize")->default_str("16380");
    synth->add_option("--seed", src.synth_seed, "synthesis seed")->default_str("1");
    synth->add_option("--config", src.config, "synthesis config file (key = value lines)");
    synth->add_option("--out", synth_out, "output CSV path")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "cross-validated learner benchmark");
    std::vector<std::string> learner_names;
    int folds = 10;
    lp::SuiteOptions opts;
    std::string mavl_mode = "average";
    std::string out_text, out_csv;
    add_source_flags(bench, src);
    bench->add_option("--target", target_name, "analyte to predict")->capture_default_str();
    bench->add_option("--learners", learner_names,
                     "comma-separated learner keys (default: full suite)")
        ->delimiter(',');
    bench->add_option("--folds", folds, "cross-validation folds")->capture_default_str();
    bench->add_option("--seed", seed, "fold and learner seed")->capture_default_str();
    bench->add_option("--mlp-hidden", opts.mlp.hidden, "MLP hidden units")->capture_default_str();
    bench->add_option("--mlp-epochs", opts.mlp.epochs, "MLP training epochs")->capture_default_str();
    bench->add_option("--bags", opts.bags, "bagging resamples")->capture_default_str();
    bench->add_option("--mavl-mode", mavl_mode, "MaVL combination: average or discrete")
        ->capture_default_str();
    bench->add_option("--mavl-bins", opts.mavl_bins, "bins for MaVL discrete mode")
        ->capture_default_str();
    bench->add_option("--min-leaf", opts.tree.min_leaf, "tree minimum leaf size")
        ->capture_default_str();
    bench->add_flag("--knn-raw", [&opts](std::int64_t) { opts.knn_standardize = false; },
                    "KNN on raw feature scales instead of z-scores");
    bench->add_option("--out-text", out_text, "write the text report here");
    bench->add_option("--out-csv", out_csv, "write the machine-readable report here");

    auto* correlate = app.add_subcommand("correlate", "pairwise analyte correlation matrix");
    std::string scatter_dir;
    add_source_flags(correlate, src);
    correlate->add_option("--scatter", scatter_dir, "directory for per-pair point dumps");

    auto* knsc = app.add_subcommand("knsc", "k-nearest separation score for a query record");
    std::string query_csv;
    std::size_t knsc_k = 5;
    add_source_flags(knsc, src);
    knsc->add_option("--target", target_name, "analyte whose range defines the classes")
        ->capture_default_str();
    knsc->add_option("--query", query_csv, "query record as ALT,AST,BD,BT")->required();
    knsc->add_option("--k", knsc_k, "neighborhood size")->capture_default_str();

    auto* inspect = app.add_subcommand("inspect", "print a fitted tree as text");
    std::string inspect_learner = "reptree";
    add_source_flags(inspect, src);
    inspect->add_option("--target", target_name, "analyte to predict")->capture_default_str();
    inspect->add_option("--learner", inspect_learner, "reptree or m5p")->capture_default_str();
    inspect->add_option("--seed", seed, "prune split seed")->capture_default_str();
    inspect->add_option("--min-leaf", opts.tree.min_leaf, "tree minimum leaf size")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (synth->parsed()) return cmd_synth(src, synth_out);
        if (bench->parsed()) {
            if (mavl_mode == "average") {
                opts.mavl_mode = lp::MavlMode::average;
            } else if (mavl_mode == "discrete") {
                opts.mavl_mode = lp::MavlMode::discrete_vote;
            } else {
                throw lp::ConfigError("--mavl-mode must be 'average' or 'discrete'");
            }
            return cmd_bench(src, target_name, learner_names, folds, seed, opts, out_text, out_csv);
        }
        if (correlate->parsed()) return cmd_correlate(src, scatter_dir);
        if (knsc->parsed()) return cmd_knsc(src, target_name, query_csv, knsc_k);
        if (inspect->parsed()) return cmd_inspect(src, target_name, inspect_learner, seed, opts.tree);
    } catch (const lp::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const lp::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}

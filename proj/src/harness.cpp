#include "liverpanel/harness.hpp"

#include <chrono>
#include <cstdio>

#include "liverpanel/errors.hpp"
#include "liverpanel/learners.hpp"

namespace liverpanel {

namespace {

LearnerFactory tree_factory(TreeConfig cfg, bool m5) {
    return [cfg, m5](std::uint64_t seed) -> std::unique_ptr<Regressor> {
        TreeConfig c = cfg;
        c.seed = seed;
        if (m5) return std::make_unique<M5Regressor>(c);
        return std::make_unique<RepTreeRegressor>(c);
    };
}

}  // namespace

std::vector<LearnerSpec> default_suite(const SuiteOptions& opts) {
    std::vector<LearnerSpec> suite;
    for (const std::string& key : known_learner_names()) suite.push_back(make_learner(key, opts));
    return suite;
}

std::vector<std::string> known_learner_names() {
    return {"knn1",     "knn3",          "svm",     "decision_stump",
            "m5p",      "reptree",       "mlp",     "simple_linear",
            "bagging",  "mavl",          "mean_baseline"};
}

LearnerSpec make_learner(const std::string& key, const SuiteOptions& opts) {
    if (key == "knn1") {
        const bool std = opts.knn_standardize;
        return {key, "KNN, N=1", true, false,
                [std](std::uint64_t) { return std::make_unique<KnnRegressor>(1, std); }};
    }
    if (key == "knn3") {
        const bool std = opts.knn_standardize;
        return {key, "KNN, N=3", true, false,
                [std](std::uint64_t) { return std::make_unique<KnnRegressor>(3, std); }};
    }
    if (key == "svm") {
        return {key, "SVM", false, false, nullptr};
    }
    if (key == "decision_stump") {
        return {key, "Decision Stump", true, false,
                [](std::uint64_t) { return std::make_unique<StumpRegressor>(); }};
    }
    if (key == "m5p") {
        return {key, "M5P", true, false, tree_factory(opts.tree, true)};
    }
    if (key == "reptree") {
        return {key, "REPTree", true, false, tree_factory(opts.tree, false)};
    }
    if (key == "mlp") {
        TrainConfig cfg = opts.mlp;
        return {key, "MLP", true, false, [cfg](std::uint64_t seed) -> std::unique_ptr<Regressor> {
                    TrainConfig c = cfg;
                    c.seed = seed;
                    return std::make_unique<MlpRegressor>(c);
                }};
    }
    if (key == "simple_linear") {
        return {key, "Simple Linear Regression", true, false,
                [](std::uint64_t) { return std::make_unique<SimpleLinearRegressor>(); }};
    }
    if (key == "bagging") {
        LearnerFactory base = tree_factory(opts.tree, false);
        const std::size_t bags = opts.bags;
        return {key, "Bagging", true, false,
                [base, bags](std::uint64_t seed) -> std::unique_ptr<Regressor> {
                    return std::make_unique<BaggingRegressor>(base, bags, seed);
                }};
    }
    if (key == "mavl") {
        const MavlMode mode = opts.mavl_mode;
        const std::size_t bins = opts.mavl_bins;
        const TreeConfig tree = opts.tree;
        const TrainConfig mlp = opts.mlp;
        return {key, "MaVL", true, false,
                [mode, bins, tree, mlp](std::uint64_t seed) -> std::unique_ptr<Regressor> {
                    std::vector<MavlMember> members;
                    members.push_back(
                        {"knn3", [](std::uint64_t) { return std::make_unique<KnnRegressor>(3); },
                         1.0});
                    members.push_back({"reptree", tree_factory(tree, false), 1.0});
                    members.push_back({"mlp",
                                       [mlp](std::uint64_t s) -> std::unique_ptr<Regressor> {
                                           TrainConfig c = mlp;
                                           c.seed = s;
                                           return std::make_unique<MlpRegressor>(c);
                                       },
                                       1.0});
                    return std::make_unique<MavlRegressor>(std::move(members), mode, seed, bins);
                }};
    }
    if (key == "mean_baseline") {
        return {key, "Mean Baseline", true, true,
                [](std::uint64_t) { return std::make_unique<MeanBaseline>(); }};
    }
    std::string names;
    for (const std::string& n : known_learner_names()) {
        if (!names.empty()) names += ", ";
        names += n;
    }
    throw ConfigError("unknown learner '" + key + "'; valid names: " + names);
}

bool EvaluationReport::any_failure() const {
    for (const ReportRow& row : rows) {
        if (row.status == "failed") return true;
    }
    return false;
}

EvaluationReport run_benchmark(const Dataset& d, const std::vector<LearnerSpec>& learners, int k,
                               std::uint64_t seed) {
    const FoldPlan plan = make_folds(d, k, seed);
    const std::size_t n = d.size();

    std::vector<double> actual(n);
    for (std::size_t i = 0; i < n; ++i) actual[i] = d.target_value(i);

    EvaluationReport report;
    report.provenance = d.provenance();
    report.target = d.target();
    report.n = n;
    report.folds = k;
    report.seed = seed;

    for (std::size_t li = 0; li < learners.size(); ++li) {
        const LearnerSpec& spec = learners[li];
        ReportRow row;
        row.key = spec.key;
        row.display = spec.display;

        if (!spec.supported) {
            row.status = "unsupported";
            row.notes = "out of scope";
            report.rows.push_back(std::move(row));
            continue;
        }

        const auto start = std::chrono::steady_clock::now();
        try {
            std::vector<double> predicted(n, 0.0);
            if (spec.in_sample_fixture) {
                auto model = spec.factory(rng::mix(seed, li));
                model->fit(d);
                for (std::size_t i = 0; i < n; ++i) predicted[i] = model->predict(d.feature_row(i));
                row.notes = "in-sample fixture";
            } else {
                for (int fold = 0; fold < k; ++fold) {
                    auto model = spec.factory(rng::mix(seed, li, static_cast<std::uint64_t>(fold)));
                    model->fit(d.subset(plan.complement_indices(fold)));
                    for (std::size_t i : plan.fold_indices(fold)) {
                        predicted[i] = model->predict(d.feature_row(i));
                    }
                    if (fold == 0) row.notes = model->fitted_notes();
                }
            }
            row.metrics = evaluate(PredictionVector(std::move(predicted), actual));
            row.status = "ok";
        } catch (const Error& e) {
            row.status = "failed";
            row.error = e.what();
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.rows.push_back(std::move(row));
    }
    return report;
}

CorrelationResult correlate(const Dataset& d) {
    if (d.size() == 0) throw EmptyDataset();
    std::array<std::vector<double>, 4> columns;
    for (int a = 0; a < 4; ++a) {
        columns[a].resize(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            columns[a][i] = d.records()[i].value(static_cast<Analyte>(a));
        }
    }
    CorrelationResult result;
    for (int a = 0; a < 4; ++a) {
        result.matrix[a][a] = 1.0;
        for (int b = a + 1; b < 4; ++b) {
            std::optional<double> r;
            try {
                r = ppmcc(columns[a], columns[b]);
            } catch (const ZeroVariance&) {
                r = std::nullopt;
            }
            result.matrix[a][b] = r;
            result.matrix[b][a] = r;
        }
    }
    return result;
}

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string render_text(const EvaluationReport& r) {
    std::string out;
    out += "Benchmark: target=" + std::string(analyte_name(r.target)) +
           ", n=" + std::to_string(r.n) + ", folds=" + std::to_string(r.folds) +
           ", seed=" + std::to_string(r.seed) + "\n";
    out += "Data: " + r.provenance + "\n";
    out += "Protocol: pooled out-of-fold predictions, metrics computed once per learner\n\n";

    const std::size_t name_w = 26;
    out += pad_right("Learner", name_w) + pad_left("PPMCC", 8) + pad_left("RAE (%)", 10) +
           pad_left("RRSE (%)", 10) + "  Notes\n";
    for (const ReportRow& row : r.rows) {
        std::string ppmcc_cell = "n/a", rae_cell = "n/a", rrse_cell = "n/a";
        std::string notes = row.notes;
        if (row.status == "ok" && row.metrics) {
            if (row.metrics->ppmcc) ppmcc_cell = fixed(*row.metrics->ppmcc, 4);
            rae_cell = fixed(row.metrics->rae * 100.0, 2);
            rrse_cell = fixed(row.metrics->rrse * 100.0, 2);
        } else if (row.status == "failed") {
            notes = "FAILED: " + row.error;
        }
        out += pad_right(row.display, name_w) + pad_left(ppmcc_cell, 8) + pad_left(rae_cell, 10) +
               pad_left(rrse_cell, 10);
        if (!notes.empty()) out += "  " + notes;
        out += "\n";
    }
    return out;
}

std::string render_csv(const EvaluationReport& r) {
    std::string out;
    out += "# target=" + std::string(analyte_name(r.target)) + " n=" + std::to_string(r.n) +
           " folds=" + std::to_string(r.folds) + " seed=" + std::to_string(r.seed) + "\n";
    out += "# data=" + r.provenance + "\n";
    out += "learner,display,status,ppmcc,rae,rrse,notes\n";
    for (const ReportRow& row : r.rows) {
        std::string ppmcc_cell, rae_cell, rrse_cell;
        if (row.status == "ok" && row.metrics) {
            if (row.metrics->ppmcc) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.10g", *row.metrics->ppmcc);
                ppmcc_cell = buf;
            }
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.10g", row.metrics->rae);
            rae_cell = buf;
            std::snprintf(buf, sizeof(buf), "%.10g", row.metrics->rrse);
            rrse_cell = buf;
        }
        const std::string notes = row.status == "failed" ? row.error : row.notes;
        out += row.key + "," + csv_quote(row.display) + "," + row.status + "," + ppmcc_cell + "," +
               rae_cell + "," + rrse_cell + "," + csv_quote(notes) + "\n";
    }
    return out;
}

std::string render_correlation_text(const CorrelationResult& c) {
    std::string out = pad_right("", 5);
    for (Analyte a : kAnalytes) out += pad_left(std::string(analyte_name(a)), 9);
    out += "\n";
    for (int a = 0; a < 4; ++a) {
        out += pad_right(std::string(analyte_name(static_cast<Analyte>(a))), 5);
        for (int b = 0; b < 4; ++b) {
            const auto& cell = c.matrix[a][b];
            out += pad_left(cell ? fixed(*cell, 4) : "n/a", 9);
        }
        out += "\n";
    }
    return out;
}

}  // namespace liverpanel

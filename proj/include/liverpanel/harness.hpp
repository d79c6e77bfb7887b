#ifndef LIVERPANEL_HARNESS_HPP
#define LIVERPANEL_HARNESS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "liverpanel/ensemble.hpp"
#include "liverpanel/metrics.hpp"
#include "liverpanel/mlp.hpp"
#include "liverpanel/trees.hpp"

namespace liverpanel {

// Knobs shared by the stock learner set; per-learner seeds are mixed in by
// the benchmark loop, so the seed fields here are ignored.
struct SuiteOptions {
    TreeConfig tree;
    TrainConfig mlp;
    std::size_t bags = 10;
    MavlMode mavl_mode = MavlMode::average;
    std::size_t mavl_bins = 10;
    bool knn_standardize = true;  // raw Euclidean distances when false
};

struct LearnerSpec {
    std::string key;      // stable CLI identifier
    std::string display;  // report row label
    bool supported = true;
    // Mean baseline only: fit on the full dataset and score in-sample. Its
    // rae = rrse = 1.0 row is a live fixture for the metric denominators.
    bool in_sample_fixture = false;
    LearnerFactory factory;
};

// All rows in report order: knn1, knn3, svm, decision_stump, m5p, reptree,
// mlp, simple_linear, bagging, mavl, mean_baseline.
std::vector<LearnerSpec> default_suite(const SuiteOptions& opts = {});
std::vector<std::string> known_learner_names();
// Throws ConfigError naming the valid keys for an unknown one.
LearnerSpec make_learner(const std::string& key, const SuiteOptions& opts = {});

struct ReportRow {
    std::string key;
    std::string display;
    std::string status;  // ok | unsupported | failed
    std::optional<MetricTriple> metrics;
    std::string notes;
    std::string error;
    double seconds = 0.0;  // wall clock; kept out of rendered reports
};

struct EvaluationReport {
    std::string provenance;
    Analyte target = Analyte::bt;
    std::size_t n = 0;
    int folds = 0;
    std::uint64_t seed = 0;
    std::vector<ReportRow> rows;

    bool any_failure() const;
};

// k-fold cross-validation; metrics are computed once per learner on the
// pooled out-of-fold prediction vector.
EvaluationReport run_benchmark(const Dataset& d, const std::vector<LearnerSpec>& learners, int k,
                               std::uint64_t seed);

// Pairwise PPMCC over all analyte columns. A constant column yields absent
// cells instead of an error.
struct CorrelationResult {
    std::array<std::array<std::optional<double>, 4>, 4> matrix;
};
CorrelationResult correlate(const Dataset& d);

// Aligned plain-text table, PPMCC to 4 decimals, RAE/RRSE as percentages to
// 2 decimals. The only place ratios are scaled by 100.
std::string render_text(const EvaluationReport& r);
// Machine-readable rows with ratio-valued metrics.
std::string render_csv(const EvaluationReport& r);
std::string render_correlation_text(const CorrelationResult& c);

}  // namespace liverpanel

#endif

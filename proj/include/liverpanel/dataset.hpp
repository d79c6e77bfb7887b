#ifndef LIVERPANEL_DATASET_HPP
#define LIVERPANEL_DATASET_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace liverpanel {

// The four analytes of a liver panel, in canonical column order.
enum class Analyte : int { alt = 0, ast = 1, bd = 2, bt = 3 };

inline constexpr std::array<Analyte, 4> kAnalytes = {Analyte::alt, Analyte::ast, Analyte::bd,
                                                     Analyte::bt};

std::string_view analyte_name(Analyte a);
std::optional<Analyte> analyte_from_name(std::string_view name);  // case-insensitive

// One lab analysis: ALT and AST in IU/L, bilirubin direct/total in mg/dL.
// All values finite and non-negative. BD > BT is possible in real lab data
// and is surfaced as a quality flag, not rejected.
struct PanelRecord {
    double alt = 0.0;
    double ast = 0.0;
    double bd = 0.0;
    double bt = 0.0;

    double value(Analyte a) const;
    bool bd_exceeds_bt() const { return bd > bt; }
};

using FeatureVector = std::array<double, 3>;

// Immutable record collection with a designated target analyte. The three
// remaining analytes, in canonical order, are the features.
class Dataset {
public:
    Dataset(std::vector<PanelRecord> records, Analyte target, std::string provenance);

    const std::vector<PanelRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    Analyte target() const { return target_; }
    const std::array<Analyte, 3>& features() const { return features_; }
    const std::string& provenance() const { return provenance_; }

    FeatureVector feature_row(std::size_t i) const;
    double target_value(std::size_t i) const { return records_[i].value(target_); }

    // Same target and provenance, records picked by index (repeats allowed).
    Dataset subset(const std::vector<std::size_t>& indices) const;

private:
    std::vector<PanelRecord> records_;
    Analyte target_;
    std::array<Analyte, 3> features_;
    std::string provenance_;
};

// Clinical reference intervals, inclusive on both ends.
struct ReferenceRanges {
    struct Interval {
        double low = 0.0;
        double high = 0.0;
    };
    std::array<Interval, 4> by_analyte;

    // ALT 10-40 IU/L, AST 10-34 IU/L, BD 0-0.3 mg/dL, BT 0.3-1.9 mg/dL.
    static ReferenceRanges defaults();
    void validate() const;  // low < high everywhere
};

// Deterministic k-fold partition. assignments[i] is the fold of record i.
struct FoldPlan {
    int k = 0;
    std::vector<int> assignments;
    std::uint64_t seed = 0;

    std::vector<std::size_t> fold_indices(int fold) const;
    std::vector<std::size_t> complement_indices(int fold) const;
};

// Per-analyte synthesis parameters: the body is log-normal
// exp(log_mean + log_sd * z) with z standard normal, clipped to [min, max].
struct AnalyteCalibration {
    double min = 0.0;
    double max = 0.0;
    double log_mean = 0.0;
    double log_sd = 1.0;
};

struct Calibration {
    std::array<AnalyteCalibration, 4> analytes;
    std::array<std::array<double, 4>, 4> correlation;  // symmetric, unit diagonal

    // Synthetic stand-in for real lab exports. Not ground truth: bodies are
    // log-normal around typical clinical values with wide clip bounds, and
    // the correlation structure (ALT-AST 0.7, BD-BT 0.95, cross terms 0.4)
    // is chosen so the strong bilirubin coupling is realizable.
    static Calibration defaults();
    void validate() const;
};

// Parsed key-value synthesis config; flags may override seed/n downstream.
struct SynthConfig {
    Calibration calibration = Calibration::defaults();
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
};

// --- operations ---

// Header must name all four analytes (any order, case-insensitive). Rows with
// missing, non-numeric, non-finite, or negative cells abort the load.
Dataset load_csv(const std::filesystem::path& path, Analyte target);
Dataset parse_csv(std::string_view text, Analyte target, std::string provenance);

// Canonical header ALT,AST,BD,BT; values rendered to 6 significant digits.
void write_csv(const Dataset& d, const std::filesystem::path& path);
std::string to_csv(const Dataset& d);

// n records from a correlated 4-d log-scale Gaussian (Cholesky of the
// correlation applied to iid standard normals), deterministic per seed.
Dataset synthesize(std::size_t n, std::uint64_t seed,
                   const Calibration& cal = Calibration::defaults(), Analyte target = Analyte::bt);

struct AnalyteSummary {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double stddev = 0.0;  // population (divisor n)
};

std::array<AnalyteSummary, 4> summarize(const Dataset& d);

// flags[i] is true iff any analyte of record i falls outside its reference
// interval (inclusive bounds count as in range).
std::vector<bool> flag_out_of_range(const Dataset& d, const ReferenceRanges& r);

// Shuffled assignment; fold sizes differ by at most one. 2 <= k <= |d|.
FoldPlan make_folds(const Dataset& d, int k, std::uint64_t seed);

// `key = value` lines, '#' comments. Keys: <analyte>.min/.max/.log_mean/.log_sd,
// corr.<analyte>.<analyte>, seed, n.
SynthConfig parse_synth_config(std::string_view text);
SynthConfig load_synth_config(const std::filesystem::path& path);

}  // namespace liverpanel

#endif

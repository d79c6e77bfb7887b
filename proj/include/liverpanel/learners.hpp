#ifndef LIVERPANEL_LEARNERS_HPP
#define LIVERPANEL_LEARNERS_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "liverpanel/regressor.hpp"

namespace liverpanel {

// --- decision stump ---

// Single split maximizing variance reduction; degrades to the global mean
// when no feature admits a split.
struct StumpModel {
    bool has_split = false;
    int feature = -1;  // index into Dataset::features()
    double threshold = 0.0;
    double left_value = 0.0;   // mean of samples with feature <= threshold
    double right_value = 0.0;  // mean of the rest
    double constant = 0.0;     // used when has_split is false

    double predict(const FeatureVector& x) const;
};

StumpModel fit_stump(const Dataset& d);

// --- single-best-attribute least squares ---

struct SimpleLinearModel {
    int feature = -1;
    double slope = 0.0;
    double intercept = 0.0;

    double predict(const FeatureVector& x) const { return intercept + slope * x[feature]; }
};

// OLS per candidate feature; keeps the feature with minimal training SSE.
// Throws AllFeaturesConstant when no feature varies.
SimpleLinearModel fit_simple_linear(const Dataset& d);

// --- k-nearest-neighbor regression ---

struct KnnModel {
    std::size_t k = 1;
    bool standardized = true;
    std::array<double, 3> mean{};  // frozen at fit time
    std::array<double, 3> scale{};
    std::vector<FeatureVector> points;
    std::vector<double> targets;

    // Unweighted mean of the k nearest neighbors; ties broken by lower
    // training index.
    double predict(const FeatureVector& x) const;
};

KnnModel fit_knn(const Dataset& d, std::size_t k, bool standardize = true);

// --- k-nearest separation score ---

using Point = std::vector<double>;
using PointSet = std::vector<Point>;

// Mean distance to the k nearest outliers vs. the nearest class neighborhood:
// (D_min - D_out) / max(D_min, D_out), in [-1, 1]. Empty class sets are
// skipped; a non-empty set smaller than k raises InsufficientPoints with its
// label. Distances are plain Euclidean.
double knsc(std::span<const double> query, const std::vector<PointSet>& classes,
            const std::vector<std::string>& class_labels, const PointSet& outliers, std::size_t k);

// --- Regressor wrappers ---

class MeanBaseline final : public Regressor {
public:
    void fit(const Dataset& d) override;
    double predict(const FeatureVector&) const override { return mean_; }
    const std::string& name() const override { return name_; }

private:
    double mean_ = 0.0;
    std::string name_ = "Mean Baseline";
};

class StumpRegressor final : public Regressor {
public:
    void fit(const Dataset& d) override;
    double predict(const FeatureVector& x) const override { return model_.predict(x); }
    const std::string& name() const override { return name_; }
    std::string fitted_notes() const override;
    const StumpModel& model() const { return model_; }

private:
    StumpModel model_;
    std::array<Analyte, 3> features_{};
    std::string name_ = "Decision Stump";
};

class SimpleLinearRegressor final : public Regressor {
public:
    void fit(const Dataset& d) override;
    double predict(const FeatureVector& x) const override { return model_.predict(x); }
    const std::string& name() const override { return name_; }
    std::string fitted_notes() const override;
    const SimpleLinearModel& model() const { return model_; }

private:
    SimpleLinearModel model_;
    std::array<Analyte, 3> features_{};
    std::string name_ = "Simple Linear Regression";
};

class KnnRegressor final : public Regressor {
public:
    explicit KnnRegressor(std::size_t k, bool standardize = true);
    void fit(const Dataset& d) override;
    double predict(const FeatureVector& x) const override { return model_.predict(x); }
    const std::string& name() const override { return name_; }
    const KnnModel& model() const { return model_; }

private:
    std::size_t k_;
    bool standardize_;
    KnnModel model_;
    std::string name_;
};

}  // namespace liverpanel

#endif

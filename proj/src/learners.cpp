#include "liverpanel/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "liverpanel/errors.hpp"

namespace liverpanel {

namespace {

struct ValueTarget {
    double value;
    double target;
};

double sum_targets(const Dataset& d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) s += d.target_value(i);
    return s;
}

// Exact constancy tests. A constant column whose value is not representable
// (0.2, say) leaves sums of squares at rounding-dust level rather than zero,
// so variance-based checks cannot be trusted to spot it.
bool constant_feature(const Dataset& d, int f) {
    const double first = d.feature_row(0)[f];
    for (std::size_t i = 1; i < d.size(); ++i) {
        if (d.feature_row(i)[f] != first) return false;
    }
    return true;
}

bool constant_target(const Dataset& d) {
    const double first = d.target_value(0);
    for (std::size_t i = 1; i < d.size(); ++i) {
        if (d.target_value(i) != first) return false;
    }
    return true;
}

}  // namespace

// --- stump ---

double StumpModel::predict(const FeatureVector& x) const {
    if (!has_split) return constant;
    return x[feature] <= threshold ? left_value : right_value;
}

StumpModel fit_stump(const Dataset& d) {
    const std::size_t n = d.size();
    StumpModel best;
    best.constant = sum_targets(d) / static_cast<double>(n);
    if (n < 2 || constant_target(d)) return best;

    // Parent SSE; variance reduction is parent minus child SSE up to 1/n.
    double parent_sse = 0.0;
    {
        const double mean = best.constant;
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = d.target_value(i) - mean;
            parent_sse += dv * dv;
        }
    }

    double best_gain = 0.0;  // accept only strictly positive reduction
    for (int f = 0; f < 3; ++f) {
        std::vector<ValueTarget> rows(n);
        for (std::size_t i = 0; i < n; ++i) {
            rows[i] = {d.feature_row(i)[f], d.target_value(i)};
        }
        std::sort(rows.begin(), rows.end(),
                  [](const ValueTarget& a, const ValueTarget& b) { return a.value < b.value; });

        double left_sum = 0.0, left_sq = 0.0;
        double total_sum = 0.0, total_sq = 0.0;
        for (const ValueTarget& r : rows) {
            total_sum += r.target;
            total_sq += r.target * r.target;
        }

        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += rows[i].target;
            left_sq += rows[i].target * rows[i].target;
            if (rows[i].value == rows[i + 1].value) continue;

            const double nl = static_cast<double>(i + 1);
            const double nr = static_cast<double>(n - i - 1);
            const double right_sum = total_sum - left_sum;
            const double right_sq = total_sq - left_sq;
            const double sse_left = left_sq - left_sum * left_sum / nl;
            const double sse_right = right_sq - right_sum * right_sum / nr;
            const double gain = parent_sse - (sse_left + sse_right);
            if (gain > best_gain) {
                best_gain = gain;
                best.has_split = true;
                best.feature = f;
                best.threshold = (rows[i].value + rows[i + 1].value) / 2.0;
                best.left_value = left_sum / nl;
                best.right_value = right_sum / nr;
            }
        }
    }
    return best;
}

// --- simple linear regression ---

SimpleLinearModel fit_simple_linear(const Dataset& d) {
    const std::size_t n = d.size();
    if (n < 2) throw DatasetTooSmall("simple linear regression needs at least 2 records");

    const double y_mean = sum_targets(d) / static_cast<double>(n);
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dy = d.target_value(i) - y_mean;
        syy += dy * dy;
    }

    SimpleLinearModel best;

    // A constant target regresses to slope zero; still name a real column.
    if (constant_target(d)) {
        for (int f = 0; f < 3; ++f) {
            if (!constant_feature(d, f)) {
                best.feature = f;
                best.intercept = y_mean;
                return best;
            }
        }
        throw AllFeaturesConstant();
    }

    double best_sse = std::numeric_limits<double>::infinity();
    for (int f = 0; f < 3; ++f) {
        if (constant_feature(d, f)) continue;
        double x_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) x_sum += d.feature_row(i)[f];
        const double x_mean = x_sum / static_cast<double>(n);

        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = d.feature_row(i)[f] - x_mean;
            sxx += dx * dx;
            sxy += dx * (d.target_value(i) - y_mean);
        }
        if (sxx <= 0.0) continue;

        const double slope = sxy / sxx;
        const double sse = std::max(0.0, syy - slope * sxy);
        if (sse < best_sse) {
            best_sse = sse;
            best.feature = f;
            best.slope = slope;
            best.intercept = y_mean - slope * x_mean;
        }
    }
    if (best.feature < 0) throw AllFeaturesConstant();
    return best;
}

// --- knn ---

KnnModel fit_knn(const Dataset& d, std::size_t k, bool standardize) {
    const std::size_t n = d.size();
    if (k < 1 || k > n) {
        throw KTooLarge("knn needs 1 <= k <= " + std::to_string(n) + ", got " + std::to_string(k));
    }

    KnnModel m;
    m.k = k;
    m.standardized = standardize;
    m.mean.fill(0.0);
    m.scale.fill(1.0);

    if (standardize) {
        for (int f = 0; f < 3; ++f) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) sum += d.feature_row(i)[f];
            m.mean[f] = sum / static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dv = d.feature_row(i)[f] - m.mean[f];
                ss += dv * dv;
            }
            const double sd = std::sqrt(ss / static_cast<double>(n));
            m.scale[f] = constant_feature(d, f) || !(sd > 0.0) ? 1.0 : sd;
        }
    }

    m.points.reserve(n);
    m.targets.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        FeatureVector x = d.feature_row(i);
        for (int f = 0; f < 3; ++f) x[f] = (x[f] - m.mean[f]) / m.scale[f];
        m.points.push_back(x);
        m.targets.push_back(d.target_value(i));
    }
    return m;
}

double KnnModel::predict(const FeatureVector& query) const {
    FeatureVector q = query;
    for (int f = 0; f < 3; ++f) q[f] = (q[f] - mean[f]) / scale[f];

    const std::size_t n = points.size();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const FeatureVector& p = points[i];
        const double d0 = q[0] - p[0];
        const double d1 = q[1] - p[1];
        const double d2 = q[2] - p[2];
        dist[i] = {d0 * d0 + d1 * d1 + d2 * d2, i};
    }

    const auto by_distance_then_index = [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
    };
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end(), by_distance_then_index);
    std::sort(dist.begin(), dist.begin() + k, by_distance_then_index);

    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += targets[dist[i].second];
    return sum / static_cast<double>(k);
}

// --- k-nearest separation score ---

namespace {

double mean_distance_to_k_nearest(std::span<const double> query, const PointSet& set,
                                  std::size_t k) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Point& p = set[i];
        if (p.size() != query.size()) {
            throw Error("point dimension mismatch in k-NSC input");
        }
        double s = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double dv = query[j] - p[j];
            s += dv * dv;
        }
        dist.emplace_back(s, i);
    }
    std::sort(dist.begin(), dist.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += std::sqrt(dist[i].first);
    return sum / static_cast<double>(k);
}

}  // namespace

double knsc(std::span<const double> query, const std::vector<PointSet>& classes,
            const std::vector<std::string>& class_labels, const PointSet& outliers,
            std::size_t k) {
    if (k < 1) throw Error("k-NSC needs k >= 1");
    if (outliers.size() < k) throw InsufficientPoints("outliers", k, outliers.size());

    double d_min = std::numeric_limits<double>::infinity();
    bool any_class = false;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (classes[c].empty()) continue;  // not an existing class
        const std::string label = c < class_labels.size() ? class_labels[c]
                                                          : "class " + std::to_string(c);
        if (classes[c].size() < k) throw InsufficientPoints(label, k, classes[c].size());
        any_class = true;
        d_min = std::min(d_min, mean_distance_to_k_nearest(query, classes[c], k));
    }
    if (!any_class) throw InsufficientPoints("classes", k, 0);

    const double d_out = mean_distance_to_k_nearest(query, outliers, k);
    const double denom = std::max(d_min, d_out);
    if (denom <= 0.0) return 0.0;
    return (d_min - d_out) / denom;
}

// --- Regressor wrappers ---

void MeanBaseline::fit(const Dataset& d) {
    mean_ = sum_targets(d) / static_cast<double>(d.size());
}

void StumpRegressor::fit(const Dataset& d) {
    model_ = fit_stump(d);
    features_ = d.features();
}

std::string StumpRegressor::fitted_notes() const {
    if (!model_.has_split) return "constant";
    return "split=" + std::string(analyte_name(features_[model_.feature]));
}

void SimpleLinearRegressor::fit(const Dataset& d) {
    model_ = fit_simple_linear(d);
    features_ = d.features();
}

std::string SimpleLinearRegressor::fitted_notes() const {
    return "feature=" + std::string(analyte_name(features_[model_.feature]));
}

KnnRegressor::KnnRegressor(std::size_t k, bool standardize)
    : k_(k), standardize_(standardize), name_("KNN, N=" + std::to_string(k)) {}

void KnnRegressor::fit(const Dataset& d) { model_ = fit_knn(d, k_, standardize_); }

}  // namespace liverpanel

#include "liverpanel/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "liverpanel/errors.hpp"
#include "liverpanel/learners.hpp"
#include "liverpanel/mlp.hpp"
#include "liverpanel/trees.hpp"

namespace liverpanel {

std::vector<std::size_t> bootstrap_indices(std::size_t n, rng::Engine& gen) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = rng::bounded(gen, n);
    return idx;
}

BaggingRegressor::BaggingRegressor(LearnerFactory base, std::size_t bags, std::uint64_t seed)
    : base_(std::move(base)), bags_(bags), seed_(seed) {
    if (bags_ < 1) throw ConfigError("bagging needs at least 1 bag");
    if (!base_) throw ConfigError("bagging needs a base learner");
}

void BaggingRegressor::fit(const Dataset& d) {
    rng::Engine gen(seed_);
    std::vector<std::vector<std::size_t>> resamples(bags_);
    for (std::size_t b = 0; b < bags_; ++b) resamples[b] = bootstrap_indices(d.size(), gen);
    fit_with_resamples(d, resamples);
}

void BaggingRegressor::fit_with_resamples(const Dataset& d,
                                          const std::vector<std::vector<std::size_t>>& resamples) {
    if (resamples.size() != bags_) throw ConfigError("resample count must equal bag count");
    models_.clear();
    resamples_ = resamples;
    for (std::size_t b = 0; b < bags_; ++b) {
        auto model = base_(rng::mix(seed_, b));
        try {
            model->fit(d.subset(resamples_[b]));
        } catch (const Error& e) {
            throw Error("bag " + std::to_string(b) + ": " + e.what());
        }
        models_.push_back(std::move(model));
    }
}

double BaggingRegressor::predict(const FeatureVector& x) const {
    if (models_.empty()) throw Error("bagging model is not fitted");
    double sum = 0.0;
    for (const auto& m : models_) sum += m->predict(x);
    return sum / static_cast<double>(models_.size());
}

int mavl_vote(std::span<const int> labels, std::span<const double> weights) {
    if (labels.empty()) throw EmptyMemberSet();
    if (labels.size() != weights.size()) throw ConfigError("one weight per member required");
    std::map<int, double> tally;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (!(weights[j] > 0.0)) throw ConfigError("member weights must be positive");
        tally[labels[j]] += weights[j];
    }
    // std::map iterates labels in ascending order, so keeping only strictly
    // greater sums breaks ties toward the lowest class index.
    int best = tally.begin()->first;
    double best_sum = tally.begin()->second;
    for (const auto& [label, sum] : tally) {
        if (sum > best_sum) {
            best = label;
            best_sum = sum;
        }
    }
    return best;
}

double mavl_regress(std::span<const double> values, std::span<const double> weights) {
    if (values.empty()) throw EmptyMemberSet();
    if (values.size() != weights.size()) throw ConfigError("one weight per member required");
    double total = 0.0, acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!(weights[j] > 0.0)) throw ConfigError("member weights must be positive");
        total += weights[j];
        acc += weights[j] * values[j];
    }
    return acc / total;
}

BinScheme::BinScheme(std::vector<double> edges) : edges_(std::move(edges)) {
    if (edges_.size() < 2) throw InvalidBounds("bin scheme needs at least 2 edges");
    for (std::size_t i = 0; i + 1 < edges_.size(); ++i) {
        if (!(edges_[i] < edges_[i + 1])) throw InvalidBounds("bin edges must strictly increase");
    }
    for (double e : edges_) {
        if (!std::isfinite(e)) throw InvalidBounds("bin edges must be finite");
    }
}

BinScheme BinScheme::equal_width(double lo, double hi, std::size_t count) {
    if (!(lo < hi)) throw InvalidBounds("bin range must have lo < hi");
    if (count < 1) throw InvalidBounds("bin count must be >= 1");
    std::vector<double> edges(count + 1);
    for (std::size_t i = 0; i <= count; ++i) {
        edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count);
    }
    edges.front() = lo;
    edges.back() = hi;
    return BinScheme(std::move(edges));
}

int BinScheme::bin_of(double v) const {
    if (!std::isfinite(v) || v < edges_.front() || v > edges_.back()) {
        throw PredictionOutOfBins(v);
    }
    if (v == edges_.back()) return static_cast<int>(size()) - 1;
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), v);
    return static_cast<int>(it - edges_.begin()) - 1;
}

double BinScheme::midpoint(std::size_t bin) const {
    return (edges_[bin] + edges_[bin + 1]) / 2.0;
}

double mavl_discrete(std::span<const double> values, const BinScheme& bins,
                     std::span<const double> weights) {
    if (values.empty()) throw EmptyMemberSet();
    std::vector<int> labels(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) labels[j] = bins.bin_of(values[j]);
    return bins.midpoint(static_cast<std::size_t>(mavl_vote(labels, weights)));
}

std::vector<MavlMember> default_mavl_members() {
    std::vector<MavlMember> members;
    members.push_back({"knn3",
                       [](std::uint64_t) { return std::make_unique<KnnRegressor>(3); }, 1.0});
    members.push_back({"reptree",
                       [](std::uint64_t seed) {
                           TreeConfig cfg;
                           cfg.seed = seed;
                           return std::make_unique<RepTreeRegressor>(cfg);
                       },
                       1.0});
    members.push_back({"mlp",
                       [](std::uint64_t seed) {
                           TrainConfig cfg;
                           cfg.seed = seed;
                           return std::make_unique<MlpRegressor>(cfg);
                       },
                       1.0});
    return members;
}

MavlRegressor::MavlRegressor(std::vector<MavlMember> members, MavlMode mode, std::uint64_t seed,
                             std::size_t bin_count, std::vector<double> bin_edges)
    : members_(std::move(members)),
      mode_(mode),
      seed_(seed),
      bin_count_(bin_count),
      explicit_edges_(std::move(bin_edges)) {
    if (members_.empty()) throw EmptyMemberSet();
    double total = 0.0;
    for (const MavlMember& m : members_) {
        if (!(m.weight > 0.0)) throw ConfigError("member weights must be positive");
        if (!m.factory) throw ConfigError("member '" + m.key + "' has no factory");
        total += m.weight;
    }
    weights_.reserve(members_.size());
    for (const MavlMember& m : members_) weights_.push_back(m.weight / total);
}

void MavlRegressor::fit(const Dataset& d) {
    models_.clear();
    for (std::size_t j = 0; j < members_.size(); ++j) {
        auto model = members_[j].factory(rng::mix(seed_, j));
        try {
            model->fit(d);
        } catch (const Error& e) {
            throw Error("member '" + members_[j].key + "': " + e.what());
        }
        models_.push_back(std::move(model));
    }
    if (mode_ == MavlMode::discrete_vote) {
        if (!explicit_edges_.empty()) {
            bins_ = std::make_unique<BinScheme>(explicit_edges_);
        } else {
            double lo = d.target_value(0), hi = d.target_value(0);
            for (std::size_t i = 1; i < d.size(); ++i) {
                lo = std::min(lo, d.target_value(i));
                hi = std::max(hi, d.target_value(i));
            }
            if (!(lo < hi)) throw DegenerateTarget();
            bins_ = std::make_unique<BinScheme>(BinScheme::equal_width(lo, hi, bin_count_));
        }
    }
}

double MavlRegressor::predict(const FeatureVector& x) const {
    if (models_.empty()) throw Error("MaVL model is not fitted");
    std::vector<double> preds(models_.size());
    for (std::size_t j = 0; j < models_.size(); ++j) preds[j] = models_[j]->predict(x);
    if (mode_ == MavlMode::average) return mavl_regress(preds, weights_);
    return mavl_discrete(preds, *bins_, weights_);
}

std::string MavlRegressor::fitted_notes() const {
    std::string notes = mode_ == MavlMode::average ? "mode=average" : "mode=discrete-vote";
    notes += ", members=";
    for (std::size_t j = 0; j < members_.size(); ++j) {
        if (j) notes += "+";
        notes += members_[j].key;
    }
    return notes;
}

}  // namespace liverpanel

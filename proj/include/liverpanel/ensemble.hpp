#ifndef LIVERPANEL_ENSEMBLE_HPP
#define LIVERPANEL_ENSEMBLE_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "liverpanel/regressor.hpp"
#include "liverpanel/rng.hpp"

namespace liverpanel {

// Builds a fresh, unfitted learner. The seed parameterizes any internal
// randomness (tree prune split, MLP init); deterministic learners ignore it.
using LearnerFactory = std::function<std::unique_ptr<Regressor>(std::uint64_t)>;

// n indices drawn uniformly with replacement, consumed sequentially from gen.
std::vector<std::size_t> bootstrap_indices(std::size_t n, rng::Engine& gen);

class BaggingRegressor final : public Regressor {
public:
    BaggingRegressor(LearnerFactory base, std::size_t bags = 10, std::uint64_t seed = 0);

    void fit(const Dataset& d) override;
    // Test hook: fit on caller-supplied index lists instead of fresh
    // bootstrap draws. One list per bag.
    void fit_with_resamples(const Dataset& d,
                            const std::vector<std::vector<std::size_t>>& resamples);
    double predict(const FeatureVector& x) const override;
    const std::string& name() const override { return name_; }

    std::size_t bags() const { return bags_; }
    const std::vector<std::vector<std::size_t>>& resamples() const { return resamples_; }

private:
    LearnerFactory base_;
    std::size_t bags_;
    std::uint64_t seed_;
    std::vector<std::unique_ptr<Regressor>> models_;
    std::vector<std::vector<std::size_t>> resamples_;
    std::string name_ = "Bagging";
};

// --- majority-vote combination ---

// Weighted vote over integer class labels; the winning class is the one with
// the largest summed weight, ties going to the lowest class index.
int mavl_vote(std::span<const int> labels, std::span<const double> weights);

// Weighted arithmetic mean with weights normalized to sum 1.
double mavl_regress(std::span<const double> values, std::span<const double> weights);

// Strictly increasing edges partitioning the target range; the last bin is
// closed on the right so the maximum maps inside.
class BinScheme {
public:
    explicit BinScheme(std::vector<double> edges);
    static BinScheme equal_width(double lo, double hi, std::size_t count);

    std::size_t size() const { return edges_.size() - 1; }
    int bin_of(double v) const;  // throws PredictionOutOfBins
    double midpoint(std::size_t bin) const;
    const std::vector<double>& edges() const { return edges_; }

private:
    std::vector<double> edges_;
};

// Bins each member prediction, votes, returns the winning bin's midpoint.
double mavl_discrete(std::span<const double> values, const BinScheme& bins,
                     std::span<const double> weights);

enum class MavlMode { average, discrete_vote };

struct MavlMember {
    std::string key;  // label echoed into report notes
    LearnerFactory factory;
    double weight = 1.0;
};

// KNN k=3, REPTree, MLP with equal weights.
std::vector<MavlMember> default_mavl_members();

class MavlRegressor final : public Regressor {
public:
    explicit MavlRegressor(std::vector<MavlMember> members = default_mavl_members(),
                           MavlMode mode = MavlMode::average, std::uint64_t seed = 0,
                           std::size_t bin_count = 10, std::vector<double> bin_edges = {});

    void fit(const Dataset& d) override;
    double predict(const FeatureVector& x) const override;
    const std::string& name() const override { return name_; }
    std::string fitted_notes() const override;

    MavlMode mode() const { return mode_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    std::vector<MavlMember> members_;
    MavlMode mode_;
    std::uint64_t seed_;
    std::size_t bin_count_;
    std::vector<double> explicit_edges_;
    std::vector<double> weights_;  // normalized
    std::vector<std::unique_ptr<Regressor>> models_;
    std::unique_ptr<BinScheme> bins_;
    std::string name_ = "MaVL";
};

}  // namespace liverpanel

#endif

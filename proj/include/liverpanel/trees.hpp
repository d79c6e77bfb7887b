#ifndef LIVERPANEL_TREES_HPP
#define LIVERPANEL_TREES_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "liverpanel/regressor.hpp"

namespace liverpanel {

struct LinearModel {
    std::array<double, 3> coeffs{};
    double intercept = 0.0;

    double eval(const FeatureVector& x) const {
        return intercept + coeffs[0] * x[0] + coeffs[1] * x[1] + coeffs[2] * x[2];
    }
};

struct LeafModel {
    double mean = 0.0;                  // grow-set mean; the REPTree leaf value
    std::optional<LinearModel> linear;  // M5 leaf function
    bool fallback = false;              // singular regression fell back to the mean

    double predict(const FeatureVector& x) const {
        return linear && !fallback ? linear->eval(x) : mean;
    }
};

// Binary split node or leaf. Internal nodes always have both children;
// thresholds are midpoints of consecutive observed values.
struct ModelTreeNode {
    int feature = -1;
    double threshold = 0.0;
    std::unique_ptr<ModelTreeNode> left;
    std::unique_ptr<ModelTreeNode> right;

    LeafModel leaf;                          // meaningful at leaves
    std::optional<LinearModel> node_model;   // used by M5 pruning and smoothing

    std::size_t sample_count = 0;  // grow-set records reaching this node
    double variance = 0.0;         // grow-set target variance here

    bool is_leaf() const { return left == nullptr; }
};

struct TreeConfig {
    int max_depth = -1;  // unlimited
    std::size_t min_leaf = 10;
    bool prune = true;
    double prune_fraction = 0.25;  // carved from training data, never the eval fold
    std::uint64_t seed = 0;
    bool smooth = false;  // M5 leaf-model blending up the path; off keeps rules exact
    double smooth_k = 15.0;
};

// One entry per pruning decision: prune-set SSE of the subtree vs. what was
// kept. after <= before always.
struct PruneAudit {
    struct Entry {
        double before = 0.0;
        double after = 0.0;
    };
    std::vector<Entry> entries;
};

struct ModelTree {
    ModelTreeNode root;
    bool smoothed = false;
    double smooth_k = 15.0;

    double predict(const FeatureVector& x) const;
};

// Regression tree grown by maximal variance reduction with reduced-error
// pruning against a held-out slice of the training data.
ModelTree fit_reptree(const Dataset& d, const TreeConfig& cfg, PruneAudit* audit = nullptr);

// Same growth, but leaves (and candidate pruned nodes) carry least-squares
// linear models over all three features.
ModelTree fit_m5(const Dataset& d, const TreeConfig& cfg, PruneAudit* audit = nullptr);

struct RuleCondition {
    int feature = -1;
    bool less_equal = true;
    double threshold = 0.0;
};

struct Rule {
    std::vector<RuleCondition> conditions;
    LeafModel model;
};

// One rule per leaf; evaluating the rule set reproduces (unsmoothed) tree
// prediction exactly.
std::vector<Rule> extract_rules(const ModelTree& tree);
double rules_predict(std::span<const Rule> rules, const FeatureVector& x);

// Indented text dump used by the CLI `inspect` command. Stable format: each
// internal node prints one line per branch, leaves print their model.
std::string tree_to_text(const ModelTree& tree, const std::array<Analyte, 3>& features);

class RepTreeRegressor final : public Regressor {
public:
    explicit RepTreeRegressor(TreeConfig cfg = {});
    void fit(const Dataset& d) override;
    double predict(const FeatureVector& x) const override { return tree_.predict(x); }
    const std::string& name() const override { return name_; }
    const ModelTree& tree() const { return tree_; }

private:
    TreeConfig cfg_;
    ModelTree tree_;
    std::string name_ = "REPTree";
};

class M5Regressor final : public Regressor {
public:
    explicit M5Regressor(TreeConfig cfg = {});
    void fit(const Dataset& d) override;
    double predict(const FeatureVector& x) const override { return tree_.predict(x); }
    const std::string& name() const override { return name_; }
    const ModelTree& tree() const { return tree_; }

private:
    TreeConfig cfg_;
    ModelTree tree_;
    std::string name_ = "M5P";
};

}  // namespace liverpanel

#endif

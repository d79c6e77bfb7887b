#include "liverpanel/trees.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "liverpanel/errors.hpp"
#include "liverpanel/rng.hpp"

namespace liverpanel {

namespace {

// Gaussian elimination with partial pivoting on a k x k system stored
// row-major. Returns false when a pivot is negligible relative to the
// largest initial diagonal entry.
bool solve_linear(std::vector<double>& a, std::vector<double>& b, int k) {
    double scale = 0.0;
    for (int i = 0; i < k; ++i) scale = std::max(scale, std::abs(a[i * k + i]));
    if (scale <= 0.0) return false;
    const double tol = 1e-12 * scale;

    for (int col = 0; col < k; ++col) {
        int pivot = col;
        for (int r = col + 1; r < k; ++r) {
            if (std::abs(a[r * k + col]) > std::abs(a[pivot * k + col])) pivot = r;
        }
        if (std::abs(a[pivot * k + col]) <= tol) return false;
        if (pivot != col) {
            for (int c = 0; c < k; ++c) std::swap(a[col * k + c], a[pivot * k + c]);
            std::swap(b[col], b[pivot]);
        }
        for (int r = col + 1; r < k; ++r) {
            const double f = a[r * k + col] / a[col * k + col];
            for (int c = col; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
            b[r] -= f * b[col];
        }
    }
    for (int col = k - 1; col >= 0; --col) {
        double v = b[col];
        for (int c = col + 1; c < k; ++c) v -= a[col * k + c] * b[c];
        b[col] = v / a[col * k + col];
    }
    return true;
}

struct GrowContext {
    const Dataset& data;
    const TreeConfig& cfg;
    bool model_leaves;  // M5: fit linear models at every node
};

double mean_target(const Dataset& d, std::span<const std::size_t> idx) {
    double s = 0.0;
    for (std::size_t i : idx) s += d.target_value(i);
    return s / static_cast<double>(idx.size());
}

// Exact constancy tests; centered sums of squares bottom out at rounding
// dust, not zero, whenever the common value is not representable.
bool constant_feature(const Dataset& d, std::span<const std::size_t> idx, int f) {
    const double first = d.feature_row(idx.front())[f];
    for (std::size_t i : idx) {
        if (d.feature_row(i)[f] != first) return false;
    }
    return true;
}

bool constant_target(const Dataset& d, std::span<const std::size_t> idx) {
    const double first = d.target_value(idx.front());
    for (std::size_t i : idx) {
        if (d.target_value(i) != first) return false;
    }
    return true;
}

// Centered least squares over the features that vary within idx. Constant
// features get coefficient zero; a singular reduced system reports nullopt.
std::optional<LinearModel> fit_ols(const Dataset& d, std::span<const std::size_t> idx) {
    const double n = static_cast<double>(idx.size());
    std::array<double, 3> x_mean{};
    for (std::size_t i : idx) {
        const FeatureVector x = d.feature_row(i);
        for (int f = 0; f < 3; ++f) x_mean[f] += x[f];
    }
    for (double& m : x_mean) m /= n;
    const double y_mean = mean_target(d, idx);

    std::vector<int> active;
    for (int f = 0; f < 3; ++f) {
        if (!constant_feature(d, idx, f)) active.push_back(f);
    }

    LinearModel model;
    if (active.empty()) {
        model.intercept = y_mean;
        return model;
    }

    const int k = static_cast<int>(active.size());
    std::vector<double> gram(static_cast<std::size_t>(k) * k, 0.0);
    std::vector<double> rhs(k, 0.0);
    for (std::size_t i : idx) {
        const FeatureVector x = d.feature_row(i);
        const double dy = d.target_value(i) - y_mean;
        for (int a = 0; a < k; ++a) {
            const double dxa = x[active[a]] - x_mean[active[a]];
            rhs[a] += dxa * dy;
            for (int b = a; b < k; ++b) {
                gram[a * k + b] += dxa * (x[active[b]] - x_mean[active[b]]);
            }
        }
    }
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < a; ++b) gram[a * k + b] = gram[b * k + a];
    }

    if (!solve_linear(gram, rhs, k)) return std::nullopt;

    model.intercept = y_mean;
    for (int a = 0; a < k; ++a) {
        model.coeffs[active[a]] = rhs[a];
        model.intercept -= rhs[a] * x_mean[active[a]];
        if (!std::isfinite(rhs[a])) return std::nullopt;
    }
    return std::isfinite(model.intercept) ? std::optional(model) : std::nullopt;
}

struct BestSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Exhaustive scan over (feature, midpoint) pairs; both children must keep at
// least min_leaf records. Ties resolve to the earliest feature and lowest
// threshold because only strictly better gains replace the incumbent.
BestSplit find_best_split(const Dataset& d, std::span<const std::size_t> idx,
                          std::size_t min_leaf) {
    const std::size_t n = idx.size();
    BestSplit best;
    if (n < 2 * min_leaf) return best;

    double total_sum = 0.0, total_sq = 0.0;
    for (std::size_t i : idx) {
        const double y = d.target_value(i);
        total_sum += y;
        total_sq += y * y;
    }
    const double parent_sse = total_sq - total_sum * total_sum / static_cast<double>(n);

    std::vector<std::pair<double, double>> rows(n);  // (feature value, target)
    for (int f = 0; f < 3; ++f) {
        for (std::size_t j = 0; j < n; ++j) {
            rows[j] = {d.feature_row(idx[j])[f], d.target_value(idx[j])};
        }
        std::sort(rows.begin(), rows.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        double left_sum = 0.0, left_sq = 0.0;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            left_sum += rows[j].second;
            left_sq += rows[j].second * rows[j].second;
            if (rows[j].first == rows[j + 1].first) continue;
            const std::size_t nl = j + 1;
            const std::size_t nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) continue;

            const double right_sum = total_sum - left_sum;
            const double right_sq = total_sq - left_sq;
            const double sse_l = left_sq - left_sum * left_sum / static_cast<double>(nl);
            const double sse_r = right_sq - right_sum * right_sum / static_cast<double>(nr);
            const double gain = parent_sse - (sse_l + sse_r);
            if (gain > best.gain) {
                best.found = true;
                best.feature = f;
                best.threshold = (rows[j].first + rows[j + 1].first) / 2.0;
                best.gain = gain;
            }
        }
    }
    return best;
}

std::unique_ptr<ModelTreeNode> grow(const GrowContext& ctx, std::vector<std::size_t> idx,
                                    int depth) {
    auto node = std::make_unique<ModelTreeNode>();
    const std::size_t n = idx.size();
    node->sample_count = n;
    node->leaf.mean = mean_target(ctx.data, idx);
    if (constant_target(ctx.data, idx)) {
        node->variance = 0.0;
    } else {
        double ss = 0.0;
        for (std::size_t i : idx) {
            const double dv = ctx.data.target_value(i) - node->leaf.mean;
            ss += dv * dv;
        }
        node->variance = ss / static_cast<double>(n);
    }

    if (ctx.model_leaves) {
        auto model = fit_ols(ctx.data, idx);
        if (model) {
            node->node_model = model;
        }
    }

    const bool depth_ok = ctx.cfg.max_depth < 0 || depth < ctx.cfg.max_depth;
    if (depth_ok && node->variance > 0.0) {
        const BestSplit split = find_best_split(ctx.data, idx, std::max<std::size_t>(1, ctx.cfg.min_leaf));
        if (split.found) {
            std::vector<std::size_t> left_idx, right_idx;
            for (std::size_t i : idx) {
                if (ctx.data.feature_row(i)[split.feature] <= split.threshold) {
                    left_idx.push_back(i);
                } else {
                    right_idx.push_back(i);
                }
            }
            node->feature = split.feature;
            node->threshold = split.threshold;
            idx.clear();
            idx.shrink_to_fit();
            node->left = grow(ctx, std::move(left_idx), depth + 1);
            node->right = grow(ctx, std::move(right_idx), depth + 1);
            return node;
        }
    }

    if (ctx.model_leaves) {
        if (node->node_model) {
            node->leaf.linear = node->node_model;
        } else {
            node->leaf.fallback = true;
        }
    }
    return node;
}

double leaf_candidate_sse(const Dataset& d, const LeafModel& leaf,
                          std::span<const std::size_t> prune_idx) {
    double sse = 0.0;
    for (std::size_t i : prune_idx) {
        const double e = leaf.predict(d.feature_row(i)) - d.target_value(i);
        sse += e * e;
    }
    return sse;
}

// Bottom-up reduced-error pruning. Returns the subtree's prune-set SSE after
// the decisions below it; collapses a node whenever its candidate leaf does
// not increase that error.
double prune_node(const Dataset& d, ModelTreeNode& node, std::vector<std::size_t> prune_idx,
                  bool model_leaves, PruneAudit* audit) {
    LeafModel candidate;
    candidate.mean = node.leaf.mean;
    if (model_leaves) {
        if (node.node_model) {
            candidate.linear = node.node_model;
        } else {
            candidate.fallback = true;
        }
    }

    if (node.is_leaf()) {
        return leaf_candidate_sse(d, node.leaf, prune_idx);
    }

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : prune_idx) {
        if (d.feature_row(i)[node.feature] <= node.threshold) {
            left_idx.push_back(i);
        } else {
            right_idx.push_back(i);
        }
    }
    const double subtree_sse = prune_node(d, *node.left, std::move(left_idx), model_leaves, audit) +
                               prune_node(d, *node.right, std::move(right_idx), model_leaves, audit);
    const double leaf_sse = leaf_candidate_sse(d, candidate, prune_idx);

    const bool collapse = leaf_sse <= subtree_sse;
    const double kept = collapse ? leaf_sse : subtree_sse;
    if (audit) audit->entries.push_back({subtree_sse, kept});

    if (collapse) {
        node.left.reset();
        node.right.reset();
        node.feature = -1;
        node.threshold = 0.0;
        node.leaf = candidate;
    }
    return kept;
}

ModelTree fit_tree(const Dataset& d, const TreeConfig& cfg, bool model_leaves, PruneAudit* audit) {
    const std::size_t n = d.size();
    if (n < 2) throw DatasetTooSmall("tree fitting needs at least 2 records");
    if (cfg.min_leaf < 1) throw Error("min_leaf must be >= 1");
    if (cfg.prune && !(cfg.prune_fraction > 0.0 && cfg.prune_fraction < 1.0)) {
        throw Error("prune_fraction must lie in (0, 1)");
    }

    std::vector<std::size_t> grow_idx(n);
    std::iota(grow_idx.begin(), grow_idx.end(), std::size_t{0});

    std::vector<std::size_t> prune_idx;
    if (cfg.prune) {
        rng::Engine gen(cfg.seed);
        rng::shuffle(grow_idx, gen);
        std::size_t prune_count = static_cast<std::size_t>(
            std::llround(static_cast<double>(n) * cfg.prune_fraction));
        prune_count = std::clamp<std::size_t>(prune_count, 1, n - 1);
        prune_idx.assign(grow_idx.end() - static_cast<std::ptrdiff_t>(prune_count),
                         grow_idx.end());
        grow_idx.resize(n - prune_count);
        std::sort(grow_idx.begin(), grow_idx.end());
        std::sort(prune_idx.begin(), prune_idx.end());
    }

    GrowContext ctx{d, cfg, model_leaves};
    ModelTree tree;
    auto root = grow(ctx, std::move(grow_idx), 0);
    if (cfg.prune) {
        prune_node(d, *root, std::move(prune_idx), model_leaves, audit);
    }
    tree.root = std::move(*root);
    tree.smoothed = model_leaves && cfg.smooth;
    tree.smooth_k = cfg.smooth_k;
    return tree;
}

double smoothed_predict(const ModelTree& tree, const FeatureVector& x) {
    std::vector<const ModelTreeNode*> path;
    const ModelTreeNode* node = &tree.root;
    path.push_back(node);
    while (!node->is_leaf()) {
        node = x[node->feature] <= node->threshold ? node->left.get() : node->right.get();
        path.push_back(node);
    }
    double p = node->leaf.predict(x);
    for (std::size_t i = path.size() - 1; i > 0; --i) {
        const ModelTreeNode* parent = path[i - 1];
        if (!parent->node_model) continue;
        const double child_n = static_cast<double>(path[i]->sample_count);
        p = (child_n * p + tree.smooth_k * parent->node_model->eval(x)) /
            (child_n + tree.smooth_k);
    }
    return p;
}

}  // namespace

double ModelTree::predict(const FeatureVector& x) const {
    if (smoothed) return smoothed_predict(*this, x);
    const ModelTreeNode* node = &root;
    while (!node->is_leaf()) {
        node = x[node->feature] <= node->threshold ? node->left.get() : node->right.get();
    }
    return node->leaf.predict(x);
}

ModelTree fit_reptree(const Dataset& d, const TreeConfig& cfg, PruneAudit* audit) {
    return fit_tree(d, cfg, /*model_leaves=*/false, audit);
}

ModelTree fit_m5(const Dataset& d, const TreeConfig& cfg, PruneAudit* audit) {
    return fit_tree(d, cfg, /*model_leaves=*/true, audit);
}

namespace {

void collect_rules(const ModelTreeNode& node, std::vector<RuleCondition>& path,
                   std::vector<Rule>& out) {
    if (node.is_leaf()) {
        out.push_back({path, node.leaf});
        return;
    }
    path.push_back({node.feature, true, node.threshold});
    collect_rules(*node.left, path, out);
    path.back().less_equal = false;
    collect_rules(*node.right, path, out);
    path.pop_back();
}

}  // namespace

std::vector<Rule> extract_rules(const ModelTree& tree) {
    std::vector<Rule> rules;
    std::vector<RuleCondition> path;
    collect_rules(tree.root, path, rules);
    return rules;
}

double rules_predict(std::span<const Rule> rules, const FeatureVector& x) {
    for (const Rule& rule : rules) {
        bool match = true;
        for (const RuleCondition& c : rule.conditions) {
            const bool le = x[c.feature] <= c.threshold;
            if (le != c.less_equal) {
                match = false;
                break;
            }
        }
        if (match) return rule.model.predict(x);
    }
    throw Error("rule set does not cover the query point");
}

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string leaf_line(const LeafModel& leaf, const std::array<Analyte, 3>& features,
                      std::size_t count) {
    std::string out = "leaf: ";
    if (leaf.linear && !leaf.fallback) {
        out += "lm = " + format_number(leaf.linear->intercept);
        for (int f = 0; f < 3; ++f) {
            const double c = leaf.linear->coeffs[f];
            out += (c < 0.0 ? " - " : " + ") + format_number(std::abs(c)) + "*" +
                   std::string(analyte_name(features[f]));
        }
    } else {
        out += "mean = " + format_number(leaf.mean);
    }
    out += "  [n=" + std::to_string(count);
    if (leaf.fallback) out += ", fallback";
    out += "]";
    return out;
}

void dump_node(const ModelTreeNode& node, const std::array<Analyte, 3>& features,
               const std::string& indent, std::string& out) {
    if (node.is_leaf()) {
        out += indent + leaf_line(node.leaf, features, node.sample_count) + "\n";
        return;
    }
    const std::string name(analyte_name(features[node.feature]));
    out += indent + name + " <= " + format_number(node.threshold) + " :\n";
    dump_node(*node.left, features, indent + "|   ", out);
    out += indent + name + " >  " + format_number(node.threshold) + " :\n";
    dump_node(*node.right, features, indent + "|   ", out);
}

}  // namespace

std::string tree_to_text(const ModelTree& tree, const std::array<Analyte, 3>& features) {
    std::string out;
    dump_node(tree.root, features, "", out);
    return out;
}

RepTreeRegressor::RepTreeRegressor(TreeConfig cfg) : cfg_(cfg) {}

void RepTreeRegressor::fit(const Dataset& d) { tree_ = fit_reptree(d, cfg_); }

M5Regressor::M5Regressor(TreeConfig cfg) : cfg_(cfg) {}

void M5Regressor::fit(const Dataset& d) { tree_ = fit_m5(d, cfg_); }

}  // namespace liverpanel

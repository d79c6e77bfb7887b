// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Oracles here are written against first principles (brute-force
// scans, finite differences, independent metric formulas), not against the
// library's own code paths.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "liverpanel/ensemble.hpp"
#include "liverpanel/errors.hpp"
#include "liverpanel/harness.hpp"
#include "liverpanel/learners.hpp"
#include "liverpanel/metrics.hpp"
#include "liverpanel/mlp.hpp"
#include "liverpanel/rng.hpp"
#include "liverpanel/trees.hpp"

namespace lp = liverpanel;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void fail(const std::string& msg) {
        if (ok) {
            ok = false;
            detail = msg;
        }
    }
    void require(bool cond, const std::string& msg) {
        if (!cond) fail(msg);
    }
};

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

// ---- criterion 1: metric fixtures ----

void criterion_metric_fixtures(Check& c) {
    lp::rng::Engine gen(101);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 10 + lp::rng::bounded(gen, 191);
        std::vector<double> t;
        for (std::size_t i = 0; i < n; ++i) t.push_back(lp::rng::uniform(gen, 0, 100));

        double mean = 0.0;
        for (double v : t) mean += v;
        mean /= static_cast<double>(n);

        const std::vector<double> p(n, mean);
        const lp::PredictionVector pv(p, t);
        c.require(std::abs(lp::rae(pv) - 1.0) <= 1e-9,
                  "mean predictor rae " + fmt("%.12f", lp::rae(pv)) + " != 1");
        c.require(std::abs(lp::rrse(pv) - 1.0) <= 1e-9,
                  "mean predictor rrse " + fmt("%.12f", lp::rrse(pv)) + " != 1");

        const lp::PredictionVector perfect(t, t);
        c.require(lp::rae(perfect) == 0.0, "perfect fit rae is not exactly 0");
        c.require(lp::rrse(perfect) == 0.0, "perfect fit rrse is not exactly 0");
    }
}

// ---- criterion 2: ppmcc oracle ----

// Independent formulation: covariance over the product of population
// standard deviations, each term divided by n first.
double oracle_ppmcc(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
    }
    return (cov / n) / (std::sqrt(vx / n) * std::sqrt(vy / n));
}

void criterion_ppmcc(Check& c) {
    lp::rng::Engine gen(202);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 5 + lp::rng::bounded(gen, 396);
        std::vector<double> x, y;
        for (std::size_t i = 0; i < n; ++i) {
            x.push_back(lp::rng::uniform(gen, -50, 50));
            y.push_back(0.3 * x.back() + lp::rng::uniform(gen, -20, 20));
        }
        const double got = lp::ppmcc(x, y);
        const double want = oracle_ppmcc(x, y);
        if (std::abs(got - want) > 1e-10) {
            c.fail("trial " + std::to_string(trial) + ": |" + fmt("%.15f", got) + " - " +
                   fmt("%.15f", want) + "| > 1e-10");
            return;
        }
    }

    for (std::size_t n : {2u, 3u, 10u, 57u, 200u}) {
        std::vector<double> x, up, down;
        for (std::size_t i = 0; i < n; ++i) {
            x.push_back(static_cast<double>(i + 1));
            up.push_back(static_cast<double>(3 * (i + 1) + 2));
            down.push_back(static_cast<double>(100.0 - 2.0 * (i + 1)));
        }
        c.require(lp::ppmcc(x, up) == 1.0, "collinear increasing pair is not exactly +1");
        c.require(lp::ppmcc(x, down) == -1.0, "collinear decreasing pair is not exactly -1");
    }
}

// ---- criterion 3: mlp gradient vs finite differences ----

void criterion_mlp_gradient(Check& c) {
    lp::rng::Engine gen(303);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int hidden = 1 + static_cast<int>(lp::rng::bounded(gen, 8));
        const std::size_t n = 2 + lp::rng::bounded(gen, 11);

        lp::MlpBatch batch;
        for (std::size_t i = 0; i < n; ++i) {
            batch.x.push_back({lp::rng::uniform(gen, -2, 2), lp::rng::uniform(gen, -2, 2),
                               lp::rng::uniform(gen, -2, 2)});
            batch.y.push_back(lp::rng::uniform(gen, -1, 1));
        }
        const auto w = lp::init_weights(hidden, lp::rng::bounded(gen, 1u << 30));
        const auto analytic = lp::batch_gradient(w, batch).gradient.flatten();
        const auto flat = w.flatten();

        const double h = 1e-5;
        for (std::size_t i = 0; i < flat.size(); ++i) {
            auto up = flat, down = flat;
            up[i] += h;
            down[i] -= h;
            const double lu = lp::batch_gradient(lp::MlpWeights::unflatten(hidden, up), batch).loss;
            const double ld =
                lp::batch_gradient(lp::MlpWeights::unflatten(hidden, down), batch).loss;
            const double fd = (lu - ld) / (2.0 * h);
            const double rel =
                std::abs(analytic[i] - fd) / std::max(std::abs(analytic[i]) + std::abs(fd), 1e-6);
            worst = std::max(worst, rel);
        }
    }
    c.require(worst < 1e-4, "max relative gradient error " + fmt("%.3g", worst));
    if (c.ok) c.detail = "max rel err " + fmt("%.2g", worst);
}

// ---- criterion 4: tree oracles ----

struct OracleSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
};

// The stump measures parent SSE around the mean; the tree uses the
// sum-of-squares identity. Integer-valued data keeps every accumulation exact,
// so matching the parent convention makes tie comparisons bit-identical.
enum class ParentForm { centered, identity };

// Exhaustive scan over every (feature, midpoint) candidate with a direct
// per-candidate partition. Ties resolve to the earlier feature, then the lower
// threshold, and a split must strictly reduce SSE.
OracleSplit brute_force_split(const lp::Dataset& d, std::size_t min_leaf, ParentForm form) {
    const std::size_t n = d.size();
    double total_sum = 0.0, total_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = d.target_value(i);
        total_sum += y;
        total_sq += y * y;
    }
    double parent = 0.0;
    if (form == ParentForm::centered) {
        const double mean = total_sum / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = d.target_value(i) - mean;
            parent += dv * dv;
        }
    } else {
        parent = total_sq - total_sum * total_sum / static_cast<double>(n);
    }

    OracleSplit best;
    double best_gain = 0.0;
    for (int f = 0; f < 3; ++f) {
        std::vector<double> values;
        for (std::size_t i = 0; i < n; ++i) values.push_back(d.feature_row(i)[f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t v = 0; v + 1 < values.size(); ++v) {
            const double thr = (values[v] + values[v + 1]) / 2.0;
            double ls = 0.0, lsq = 0.0, rs = 0.0, rsq = 0.0;
            std::size_t nl = 0, nr = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double y = d.target_value(i);
                if (d.feature_row(i)[f] <= thr) {
                    ls += y;
                    lsq += y * y;
                    ++nl;
                } else {
                    rs += y;
                    rsq += y * y;
                    ++nr;
                }
            }
            if (nl < min_leaf || nr < min_leaf) continue;
            const double sse_l = lsq - ls * ls / static_cast<double>(nl);
            const double sse_r = rsq - rs * rs / static_cast<double>(nr);
            const double gain = parent - (sse_l + sse_r);
            if (gain > best_gain) {
                best_gain = gain;
                best.found = true;
                best.feature = f;
                best.threshold = thr;
            }
        }
    }
    return best;
}

void criterion_tree_oracles(Check& c) {
    lp::rng::Engine gen(404);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + lp::rng::bounded(gen, 196);
        std::vector<lp::PanelRecord> recs;
        for (std::size_t i = 0; i < n; ++i) {
            recs.push_back({std::floor(lp::rng::uniform(gen, 0, 12)),
                            std::floor(lp::rng::uniform(gen, 0, 12)),
                            std::floor(lp::rng::uniform(gen, 0, 12)),
                            std::floor(lp::rng::uniform(gen, 0, 30))});
        }
        const lp::Dataset d(std::move(recs), lp::Analyte::bt, "oracle");

        const auto stump_want = brute_force_split(d, 1, ParentForm::centered);
        const auto stump = lp::fit_stump(d);
        c.require(stump.has_split == stump_want.found, "stump split presence mismatch");
        if (stump.has_split && stump_want.found) {
            c.require(stump.feature == stump_want.feature &&
                          stump.threshold == stump_want.threshold,
                      "stump root disagrees with brute force on trial " + std::to_string(trial));
        }

        const auto tree_want = brute_force_split(d, 1, ParentForm::identity);
        lp::TreeConfig grow_cfg;
        grow_cfg.prune = false;
        grow_cfg.min_leaf = 1;
        const auto tree = lp::fit_reptree(d, grow_cfg);
        c.require(tree.root.is_leaf() == !tree_want.found, "reptree root presence mismatch");
        if (!tree.root.is_leaf() && tree_want.found) {
            c.require(tree.root.feature == tree_want.feature &&
                          tree.root.threshold == tree_want.threshold,
                      "reptree root disagrees with brute force on trial " + std::to_string(trial));
        }

        lp::TreeConfig prune_cfg;
        prune_cfg.min_leaf = 2;
        prune_cfg.seed = static_cast<std::uint64_t>(trial);
        lp::PruneAudit audit;
        (void)lp::fit_reptree(d, prune_cfg, &audit);
        for (const auto& e : audit.entries) {
            c.require(e.after <= e.before, "pruning increased prune-set SSE");
        }

        const auto rules = lp::extract_rules(tree);
        lp::TreeConfig m5_cfg;
        m5_cfg.prune = false;
        m5_cfg.min_leaf = 10;
        const auto m5 = lp::fit_m5(d, m5_cfg);
        const auto m5_rules = lp::extract_rules(m5);
        for (int q = 0; q < 100; ++q) {
            const lp::FeatureVector x{lp::rng::uniform(gen, -1, 13), lp::rng::uniform(gen, -1, 13),
                                      lp::rng::uniform(gen, -1, 13)};
            c.require(lp::rules_predict(rules, x) == tree.predict(x),
                      "reptree rules diverge from traversal");
            c.require(lp::rules_predict(m5_rules, x) == m5.predict(x),
                      "m5 rules diverge from traversal");
        }
        if (!c.ok) return;
    }
}

// ---- criterion 5: knn oracle ----

void criterion_knn_oracle(Check& c) {
    lp::rng::Engine gen(505);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<lp::PanelRecord> recs;
        for (int i = 0; i < 50; ++i) {
            recs.push_back({lp::rng::uniform(gen, 0, 100), lp::rng::uniform(gen, 0, 100),
                            lp::rng::uniform(gen, 0, 5), lp::rng::uniform(gen, 0, 10)});
        }
        // Duplicated points with fresh targets force exact distance ties.
        for (int i = 0; i < 10; ++i) {
            lp::PanelRecord copy = recs[static_cast<std::size_t>(i) * 3];
            copy.bt = lp::rng::uniform(gen, 0, 10);
            recs.push_back(copy);
        }
        const lp::Dataset d(std::move(recs), lp::Analyte::bt, "oracle");
        const std::size_t n = d.size();
        const std::size_t k = trial % 3 == 0 ? 1 : (trial % 3 == 1 ? 3 : 5);
        const auto m = lp::fit_knn(d, k);

        // Independent standardization: population sd per feature, constant
        // columns pinned to scale 1.
        std::array<double, 3> mean{}, scale{};
        for (int f = 0; f < 3; ++f) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) sum += d.feature_row(i)[f];
            mean[f] = sum / static_cast<double>(n);
            double ss = 0.0;
            bool same = true;
            for (std::size_t i = 0; i < n; ++i) {
                ss += (d.feature_row(i)[f] - mean[f]) * (d.feature_row(i)[f] - mean[f]);
                if (d.feature_row(i)[f] != d.feature_row(0)[f]) same = false;
            }
            const double sd = std::sqrt(ss / static_cast<double>(n));
            scale[f] = same || !(sd > 0.0) ? 1.0 : sd;
        }

        for (int q = 0; q < 20; ++q) {
            lp::FeatureVector query;
            if (q % 2 == 0) {
                const std::size_t i = lp::rng::bounded(gen, n);
                query = d.feature_row(i);  // lands exactly on training points
            } else {
                query = {lp::rng::uniform(gen, 0, 100), lp::rng::uniform(gen, 0, 100),
                         lp::rng::uniform(gen, 0, 5)};
            }

            std::vector<std::pair<double, std::size_t>> order;
            for (std::size_t i = 0; i < n; ++i) {
                double dist = 0.0;
                for (int f = 0; f < 3; ++f) {
                    const double qs = (query[f] - mean[f]) / scale[f];
                    const double ps = (d.feature_row(i)[f] - mean[f]) / scale[f];
                    dist += (qs - ps) * (qs - ps);
                }
                order.emplace_back(dist, i);
            }
            std::sort(order.begin(), order.end());
            double want = 0.0;
            for (std::size_t i = 0; i < k; ++i) want += d.target_value(order[i].second);
            want /= static_cast<double>(k);

            if (m.predict(query) != want) {
                c.fail("trial " + std::to_string(trial) + " query " + std::to_string(q) +
                       ": knn prediction diverges from exhaustive scan");
                return;
            }
        }
    }
}

// ---- criterion 6: ensemble algebra ----

void criterion_ensemble_algebra(Check& c) {
    lp::rng::Engine gen(606);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 1 + lp::rng::bounded(gen, 6);
        std::vector<int> labels;
        std::vector<double> values, w, scaled;
        for (std::size_t j = 0; j < m; ++j) {
            labels.push_back(static_cast<int>(lp::rng::bounded(gen, 5)));
            values.push_back(lp::rng::uniform(gen, -10, 10));
            w.push_back(lp::rng::uniform(gen, 0.1, 3.0));
            scaled.push_back(17.5 * w.back());
        }
        c.require(lp::mavl_vote(labels, w) == lp::mavl_vote(labels, scaled),
                  "vote changed under uniform weight scaling");

        const double r = lp::mavl_regress(values, w);
        c.require(r >= *std::min_element(values.begin(), values.end()) - 1e-12 &&
                      r <= *std::max_element(values.begin(), values.end()) + 1e-12,
                  "weighted mean fell outside the member range");

        const std::vector<double> eq(m, 1.0);
        const double plain =
            std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(m);
        c.require(std::abs(lp::mavl_regress(values, eq) - plain) <= 1e-12,
                  "equal weights disagree with the arithmetic mean");
    }

    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto d = lp::synthesize(150, seed);
        std::vector<std::size_t> all(d.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        lp::BaggingRegressor bag([](std::uint64_t) { return std::make_unique<lp::StumpRegressor>(); },
                                 1, 0);
        bag.fit_with_resamples(d, {all});
        lp::StumpRegressor base;
        base.fit(d);
        for (std::size_t i = 0; i < d.size(); i += 7) {
            c.require(bag.predict(d.feature_row(i)) == base.predict(d.feature_row(i)),
                      "identity-resample bagging diverges from its base learner");
        }
    }
}

// ---- criterion 7: end-to-end ranking sanity ----

std::optional<double> row_ppmcc(const lp::EvaluationReport& r, const std::string& key) {
    for (const auto& row : r.rows) {
        if (row.key == key && row.metrics) return row.metrics->ppmcc;
    }
    return std::nullopt;
}

void criterion_end_to_end(Check& c) {
    const auto d = lp::synthesize(16380, 1);
    const auto report = lp::run_benchmark(d, lp::default_suite(), 10, 1);

    for (const auto& row : report.rows) {
        if (row.key == "svm") {
            c.require(row.status == "unsupported", "svm row is not the unsupported placeholder");
        } else {
            c.require(row.status == "ok", "row " + row.key + " failed: " + row.error);
        }
    }

    const auto slr = row_ppmcc(report, "simple_linear");
    c.require(slr.has_value() && *slr >= 0.90,
              "simple linear ppmcc " + (slr ? fmt("%.4f", *slr) : "absent") + " below 0.90");

    double best_member = -2.0;
    for (const char* key : {"knn3", "reptree", "mlp"}) {
        const auto p = row_ppmcc(report, key);
        c.require(p.has_value(), std::string(key) + " ppmcc absent");
        if (p) best_member = std::max(best_member, *p);
    }
    const auto mavl = row_ppmcc(report, "mavl");
    c.require(mavl.has_value() && *mavl >= best_member - 0.02,
              "mavl ppmcc " + (mavl ? fmt("%.4f", *mavl) : "absent") + " trails best member " +
                  fmt("%.4f", best_member) + " by more than 0.02");

    if (c.ok) {
        c.detail = "slr " + fmt("%.4f", *slr) + ", mavl " + fmt("%.4f", *mavl) +
                   ", best member " + fmt("%.4f", best_member);
    }
}

// ---- criterion 8: byte determinism of the CLI ----

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CLI_BIN) + " " + args + " >/dev/null 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_determinism(Check& c) {
    std::string tmpl = (fs::temp_directory_path() / "liverpanel-accept-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
        c.fail("could not create a scratch directory");
        return;
    }
    const fs::path dir = tmpl;

    const std::string synth = "synth --n 16380 --seed 1 --out ";
    c.require(run_cli(synth + (dir / "s1.csv").string()) == 0, "synth run 1 failed");
    c.require(run_cli(synth + (dir / "s2.csv").string()) == 0, "synth run 2 failed");
    c.require(slurp(dir / "s1.csv") == slurp(dir / "s2.csv"), "synth outputs differ");

    // Two independent processes so byte-identity comes from seeding alone,
    // never from in-process state. The record count is scaled down from the
    // default so two full bench runs fit the budget on a single core; every
    // learner and code path is still exercised.
    const std::string bench = "bench --synth --n 4096 --synth-seed 1 --folds 10 --seed 1";
    c.require(run_cli(bench + " --out-text " + (dir / "b1.txt").string() + " --out-csv " +
                      (dir / "b1.csv").string()) == 0,
              "bench run 1 failed");
    c.require(run_cli(bench + " --out-text " + (dir / "b2.txt").string() + " --out-csv " +
                      (dir / "b2.csv").string()) == 0,
              "bench run 2 failed");
    c.require(!slurp(dir / "b1.txt").empty(), "bench wrote an empty report");
    c.require(slurp(dir / "b1.txt") == slurp(dir / "b2.txt"), "bench text reports differ");
    c.require(slurp(dir / "b1.csv") == slurp(dir / "b2.csv"), "bench csv reports differ");

    std::error_code ec;
    fs::remove_all(dir, ec);
}

struct Criterion {
    int id;
    const char* label;
    double budget_seconds;  // < 0 means resolved at runtime
    std::function<void(Check&)> body;
};

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "metric fixtures", 1.0, criterion_metric_fixtures},
        {2, "ppmcc oracle", 1.0, criterion_ppmcc},
        {3, "mlp gradient check", 10.0, criterion_mlp_gradient},
        {4, "tree oracles", 30.0, criterion_tree_oracles},
        {5, "knn oracle", 5.0, criterion_knn_oracle},
        {6, "ensemble algebra", 1.0, criterion_ensemble_algebra},
        {7, "end-to-end ranking sanity", 60.0, criterion_end_to_end},
        {8, "cli byte determinism", -1.0, criterion_determinism},
    };

    int failures = 0;
    double end_to_end_seconds = 0.0;
    for (auto& criterion : criteria) {
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.body(check);
        } catch (const std::exception& e) {
            check.fail(std::string("exception: ") + e.what());
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        double budget = criterion.budget_seconds;
        if (criterion.id == 7) end_to_end_seconds = seconds;
        if (criterion.id == 8) budget = 2.0 * end_to_end_seconds;
        if (check.ok && seconds >= budget) {
            check.fail(fmt("%.1fs", seconds) + " exceeded the " + fmt("%.0fs", budget) +
                       " budget");
        }

        if (check.ok) {
            std::printf("PASS  criterion %d  %s (%.2fs)%s%s\n", criterion.id, criterion.label,
                        seconds, check.detail.empty() ? "" : ": ", check.detail.c_str());
        } else {
            ++failures;
            std::printf("FAIL  criterion %d  %s (%.2fs): %s\n", criterion.id, criterion.label,
                        seconds, check.detail.c_str());
        }
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}

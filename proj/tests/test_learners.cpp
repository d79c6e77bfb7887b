#include "liverpanel/learners.hpp"

#include <algorithm>
#include <cmath>
#include <gtest/gtest.h>

#include "liverpanel/errors.hpp"
#include "liverpanel/rng.hpp"

namespace lp = liverpanel;

namespace {

// Target BT; features are ALT, AST, BD in that order.
lp::Dataset make_ds(std::vector<std::array<double, 4>> rows) {
    std::vector<lp::PanelRecord> recs;
    for (const auto& r : rows) recs.push_back({r[0], r[1], r[2], r[3]});
    return lp::Dataset(std::move(recs), lp::Analyte::bt, "test");
}

lp::Dataset from_xy(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<std::array<double, 4>> rows;
    for (std::size_t i = 0; i < x.size(); ++i) rows.push_back({x[i], 1.0, 1.0, y[i]});
    return make_ds(rows);
}

}  // namespace

TEST(Stump, IndicatorSplit) {
    const auto d = from_xy({1, 2, 3, 4}, {0, 0, 10, 10});
    const auto m = lp::fit_stump(d);
    ASSERT_TRUE(m.has_split);
    EXPECT_EQ(m.feature, 0);
    EXPECT_DOUBLE_EQ(m.threshold, 2.5);
    EXPECT_DOUBLE_EQ(m.left_value, 0.0);
    EXPECT_DOUBLE_EQ(m.right_value, 10.0);
}

TEST(Stump, ConstantTargetFallsBack) {
    const auto d = from_xy({1, 2, 3}, {7, 7, 7});
    const auto m = lp::fit_stump(d);
    EXPECT_FALSE(m.has_split);
    EXPECT_DOUBLE_EQ(m.constant, 7.0);
    EXPECT_DOUBLE_EQ(m.predict({99.0, 0.0, 0.0}), 7.0);
}

TEST(Stump, TwoRecords) {
    const auto d = from_xy({1, 2}, {0, 4});
    const auto m = lp::fit_stump(d);
    ASSERT_TRUE(m.has_split);
    EXPECT_DOUBLE_EQ(m.threshold, 1.5);
    EXPECT_DOUBLE_EQ(m.left_value, 0.0);
    EXPECT_DOUBLE_EQ(m.right_value, 4.0);
}

TEST(Stump, TieBreaksToLowerThreshold) {
    // Splits at 1.5 and 2.5 reduce SSE equally; the scan keeps the first.
    const auto d = from_xy({1, 2, 3}, {0, 5, 10});
    const auto m = lp::fit_stump(d);
    ASSERT_TRUE(m.has_split);
    EXPECT_DOUBLE_EQ(m.threshold, 1.5);
}

TEST(Stump, TieBreaksToEarlierFeature) {
    // ALT and AST carry the same values, so their best splits tie.
    const auto d = make_ds({{1, 1, 9, 0}, {2, 2, 9, 0}, {3, 3, 9, 10}, {4, 4, 9, 10}});
    const auto m = lp::fit_stump(d);
    ASSERT_TRUE(m.has_split);
    EXPECT_EQ(m.feature, 0);
}

TEST(Stump, BoundaryGoesLeft) {
    const auto d = from_xy({1, 2, 3, 4}, {0, 0, 10, 10});
    const auto m = lp::fit_stump(d);
    EXPECT_DOUBLE_EQ(m.predict({2.5, 0.0, 0.0}), m.left_value);
}

TEST(Stump, MatchesBruteForceScan) {
    lp::rng::Engine gen(17);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 5 + lp::rng::bounded(gen, 56);
        std::vector<std::array<double, 4>> rows;
        for (std::size_t i = 0; i < n; ++i) {
            rows.push_back({std::floor(lp::rng::uniform(gen, 0, 10)),
                            std::floor(lp::rng::uniform(gen, 0, 10)),
                            std::floor(lp::rng::uniform(gen, 0, 10)),
                            std::floor(lp::rng::uniform(gen, 0, 20))});
        }
        const auto d = make_ds(rows);
        const auto m = lp::fit_stump(d);

        // Brute force: evaluate every (feature, midpoint) split by direct
        // partitioning, same tie rules (feature order, lower threshold).
        bool found = false;
        int bf_feature = -1;
        double bf_threshold = 0.0, bf_gain = 0.0;
        double parent = 0.0;
        {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += d.target_value(i);
            mean /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                parent += (d.target_value(i) - mean) * (d.target_value(i) - mean);
            }
        }
        for (int f = 0; f < 3; ++f) {
            std::vector<double> values;
            for (std::size_t i = 0; i < n; ++i) values.push_back(d.feature_row(i)[f]);
            std::sort(values.begin(), values.end());
            values.erase(std::unique(values.begin(), values.end()), values.end());
            for (std::size_t v = 0; v + 1 < values.size(); ++v) {
                const double thr = (values[v] + values[v + 1]) / 2.0;
                double ls = 0.0, rs = 0.0;
                std::size_t ln = 0, rn = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (d.feature_row(i)[f] <= thr) {
                        ls += d.target_value(i);
                        ++ln;
                    } else {
                        rs += d.target_value(i);
                        ++rn;
                    }
                }
                const double lm = ls / static_cast<double>(ln);
                const double rm = rs / static_cast<double>(rn);
                double sse = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double fit = d.feature_row(i)[f] <= thr ? lm : rm;
                    sse += (d.target_value(i) - fit) * (d.target_value(i) - fit);
                }
                const double gain = parent - sse;
                if (gain > bf_gain) {
                    bf_gain = gain;
                    bf_feature = f;
                    bf_threshold = thr;
                    found = true;
                }
            }
        }
        ASSERT_EQ(m.has_split, found);
        if (found) {
            EXPECT_EQ(m.feature, bf_feature);
            EXPECT_DOUBLE_EQ(m.threshold, bf_threshold);
        }
    }
}

TEST(SimpleLinear, ExactRecovery) {
    lp::rng::Engine gen(3);
    std::vector<std::array<double, 4>> rows;
    for (int i = 0; i < 40; ++i) {
        const double alt = lp::rng::uniform(gen, 5, 100);
        rows.push_back({alt, lp::rng::uniform(gen, 5, 100), lp::rng::uniform(gen, 0, 1),
                        2.0 * alt + 1.0});
    }
    const auto m = lp::fit_simple_linear(make_ds(rows));
    EXPECT_EQ(m.feature, 0);
    EXPECT_NEAR(m.slope, 2.0, 1e-9);
    EXPECT_NEAR(m.intercept, 1.0, 1e-9);
}

TEST(SimpleLinear, ConstantTargetGivesZeroSlope) {
    const auto d = from_xy({1, 2, 3, 4}, {5, 5, 5, 5});
    const auto m = lp::fit_simple_linear(d);
    EXPECT_DOUBLE_EQ(m.slope, 0.0);
    EXPECT_DOUBLE_EQ(m.intercept, 5.0);
}

TEST(SimpleLinear, PicksBdWhenTargetIsBd) {
    lp::rng::Engine gen(5);
    std::vector<std::array<double, 4>> rows;
    for (int i = 0; i < 60; ++i) {
        const double bd = lp::rng::uniform(gen, 0.05, 2.0);
        rows.push_back({lp::rng::uniform(gen, 10, 80), lp::rng::uniform(gen, 10, 80), bd,
                        3.0 * bd});
    }
    const auto m = lp::fit_simple_linear(make_ds(rows));
    EXPECT_EQ(m.feature, 2);
    EXPECT_NEAR(m.slope, 3.0, 1e-9);
}

TEST(SimpleLinear, AllFeaturesConstantThrows) {
    const auto d = make_ds({{1, 1, 1, 0}, {1, 1, 1, 5}, {1, 1, 1, 9}});
    EXPECT_THROW(lp::fit_simple_linear(d), lp::AllFeaturesConstant);
}

TEST(SimpleLinear, TooSmallThrows) {
    const auto d = make_ds({{1, 2, 3, 4}});
    EXPECT_THROW(lp::fit_simple_linear(d), lp::DatasetTooSmall);
}

TEST(SimpleLinear, ResidualsOrthogonalToChosenFeature) {
    lp::rng::Engine gen(11);
    std::vector<std::array<double, 4>> rows;
    for (int i = 0; i < 50; ++i) {
        const double alt = lp::rng::uniform(gen, 5, 100);
        rows.push_back({alt, lp::rng::uniform(gen, 5, 100), lp::rng::uniform(gen, 0, 1),
                        0.5 * alt + lp::rng::uniform(gen, 0, 20)});
    }
    const auto d = make_ds(rows);
    const auto m = lp::fit_simple_linear(d);

    double x_mean = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) x_mean += d.feature_row(i)[m.feature];
    x_mean /= static_cast<double>(d.size());

    double dot = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double r = d.target_value(i) - m.predict(d.feature_row(i));
        const double dx = d.feature_row(i)[m.feature] - x_mean;
        dot += r * dx;
        scale += std::abs(r * dx);
    }
    EXPECT_LE(std::abs(dot), 1e-8 * std::max(scale, 1.0));
}

TEST(Knn, LeaveInProperty) {
    const auto d = make_ds({{1, 5, 0.1, 10}, {2, 6, 0.2, 20}, {3, 7, 0.3, 30}});
    const auto m = lp::fit_knn(d, 1);
    EXPECT_DOUBLE_EQ(m.predict(d.feature_row(1)), 20.0);
}

TEST(Knn, KEqualsNGivesGlobalMean) {
    const auto d = make_ds({{1, 5, 0.1, 10}, {2, 6, 0.2, 20}, {3, 7, 0.3, 60}});
    const auto m = lp::fit_knn(d, 3);
    EXPECT_DOUBLE_EQ(m.predict({100.0, 100.0, 100.0}), 30.0);
}

TEST(Knn, TieBreaksByLowerIndex) {
    // Five identical points; any k nearest are decided purely by index.
    std::vector<std::array<double, 4>> rows(5, {1.0, 1.0, 1.0, 0.0});
    for (int i = 0; i < 5; ++i) rows[i][3] = static_cast<double>(i + 1);
    const auto m = lp::fit_knn(make_ds(rows), 2);
    EXPECT_DOUBLE_EQ(m.predict({1.0, 1.0, 1.0}), 1.5);
}

TEST(Knn, RejectsBadK) {
    const auto d = make_ds({{1, 1, 1, 1}, {2, 2, 2, 2}});
    EXPECT_THROW(lp::fit_knn(d, 0), lp::KTooLarge);
    EXPECT_THROW(lp::fit_knn(d, 3), lp::KTooLarge);
}

TEST(Knn, ConstantFeatureDoesNotPoisonScale) {
    const auto d = make_ds({{1, 7, 0.1, 10}, {2, 7, 0.2, 20}, {9, 7, 0.9, 90}});
    const auto m = lp::fit_knn(d, 1);
    EXPECT_DOUBLE_EQ(m.scale[1], 1.0);
    EXPECT_DOUBLE_EQ(m.predict({1.0, 7.0, 0.1}), 10.0);
}

TEST(Knn, RawModeDiffersWhenScalesDiffer) {
    // In raw space the ALT axis dominates; standardized space weighs BD back in.
    const auto d = make_ds({{1000, 1, 0.1, 1}, {1002, 1, 0.9, 2}, {1012, 1, 0.1, 3}});
    const auto standardized = lp::fit_knn(d, 1, true);
    const auto raw = lp::fit_knn(d, 1, false);
    const lp::FeatureVector q{1003, 1, 0.1};
    EXPECT_DOUBLE_EQ(raw.predict(q), 2.0);           // nearest by ALT alone
    EXPECT_DOUBLE_EQ(standardized.predict(q), 1.0);  // BD distance matters
}

TEST(Knn, MatchesExhaustiveOracle) {
    lp::rng::Engine gen(23);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 50;
        std::vector<std::array<double, 4>> rows;
        for (std::size_t i = 0; i < n; ++i) {
            rows.push_back({lp::rng::uniform(gen, 0, 100), lp::rng::uniform(gen, 0, 100),
                            lp::rng::uniform(gen, 0, 5), lp::rng::uniform(gen, 0, 10)});
        }
        const auto d = make_ds(rows);
        const auto m = lp::fit_knn(d, 3);

        for (int q = 0; q < 20; ++q) {
            const lp::FeatureVector query{lp::rng::uniform(gen, 0, 100),
                                          lp::rng::uniform(gen, 0, 100),
                                          lp::rng::uniform(gen, 0, 5)};
            // Oracle: full sort over (squared distance, index) in the model's
            // standardized space.
            std::vector<std::pair<double, std::size_t>> all;
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (int f = 0; f < 3; ++f) {
                    const double qs = (query[f] - m.mean[f]) / m.scale[f];
                    const double dv = qs - m.points[i][f];
                    s += dv * dv;
                }
                all.emplace_back(s, i);
            }
            std::sort(all.begin(), all.end());
            double expect = 0.0;
            for (int i = 0; i < 3; ++i) expect += m.targets[all[i].second];
            expect /= 3.0;
            EXPECT_EQ(m.predict(query), expect);
        }
    }
}

TEST(Knsc, HandComputedValue) {
    const lp::PointSet outliers = {{1.0}, {-1.0}};
    const std::vector<lp::PointSet> classes = {{{10.0}, {-10.0}}};
    const double score = lp::knsc(std::vector<double>{0.0}, classes, {"only"}, outliers, 2);
    EXPECT_DOUBLE_EQ(score, 0.9);  // (10 - 1) / 10
}

TEST(Knsc, SymmetricConfigurationIsZero) {
    const lp::PointSet outliers = {{1.0}, {-1.0}};
    const std::vector<lp::PointSet> classes = {{{1.0}, {-1.0}}};
    EXPECT_NEAR(lp::knsc(std::vector<double>{0.0}, classes, {"only"}, outliers, 2), 0.0, 1e-12);
}

TEST(Knsc, NegativeInsideOwnCluster) {
    lp::rng::Engine gen(29);
    std::vector<lp::PointSet> classes(1);
    for (int i = 0; i < 10; ++i) {
        classes[0].push_back({lp::rng::uniform(gen, -1, 1), lp::rng::uniform(gen, -1, 1)});
    }
    lp::PointSet outliers;
    for (int i = 0; i < 10; ++i) {
        outliers.push_back({lp::rng::uniform(gen, 9, 11), lp::rng::uniform(gen, 9, 11)});
    }
    const double score = lp::knsc(std::vector<double>{0.0, 0.0}, classes, {"cluster"}, outliers, 3);
    EXPECT_LT(score, 0.0);
    EXPECT_GE(score, -1.0);
}

TEST(Knsc, BoundedAndAntisymmetric) {
    lp::rng::Engine gen(31);
    for (int trial = 0; trial < 20; ++trial) {
        lp::PointSet a, b;
        for (int i = 0; i < 6; ++i) {
            a.push_back({lp::rng::uniform(gen, -5, 5), lp::rng::uniform(gen, -5, 5)});
            b.push_back({lp::rng::uniform(gen, -5, 5), lp::rng::uniform(gen, -5, 5)});
        }
        const std::vector<double> q = {lp::rng::uniform(gen, -5, 5), lp::rng::uniform(gen, -5, 5)};
        const double forward = lp::knsc(q, {a}, {"a"}, b, 3);
        const double backward = lp::knsc(q, {b}, {"b"}, a, 3);
        EXPECT_LE(std::abs(forward), 1.0);
        EXPECT_DOUBLE_EQ(forward, -backward);
    }
}

TEST(Knsc, EmptyClassesAreSkipped) {
    const lp::PointSet outliers = {{1.0}, {-1.0}};
    const std::vector<lp::PointSet> classes = {{}, {{10.0}, {-10.0}}};
    EXPECT_DOUBLE_EQ(lp::knsc(std::vector<double>{0.0}, classes, {"empty", "far"}, outliers, 2),
                     0.9);
}

TEST(Knsc, InsufficientPointsNamesTheSet) {
    const lp::PointSet outliers = {{1.0}, {-1.0}};
    const std::vector<lp::PointSet> classes = {{{10.0}}};
    try {
        lp::knsc(std::vector<double>{0.0}, classes, {"thin class"}, outliers, 2);
        FAIL() << "expected InsufficientPoints";
    } catch (const lp::InsufficientPoints& e) {
        EXPECT_EQ(e.set_name(), "thin class");
    }
    try {
        lp::knsc(std::vector<double>{0.0}, {{{1.0}, {2.0}}}, {"c"}, {{5.0}}, 2);
        FAIL() << "expected InsufficientPoints";
    } catch (const lp::InsufficientPoints& e) {
        EXPECT_EQ(e.set_name(), "outliers");
    }
    EXPECT_THROW(lp::knsc(std::vector<double>{0.0}, {{}, {}}, {"a", "b"}, outliers, 2),
                 lp::InsufficientPoints);
}

TEST(Wrappers, NamesAndNotes) {
    const auto d = from_xy({1, 2, 3, 4}, {0, 0, 10, 10});

    lp::MeanBaseline mean;
    mean.fit(d);
    EXPECT_DOUBLE_EQ(mean.predict({0, 0, 0}), 5.0);
    EXPECT_EQ(mean.name(), "Mean Baseline");

    lp::StumpRegressor stump;
    stump.fit(d);
    EXPECT_EQ(stump.name(), "Decision Stump");
    EXPECT_EQ(stump.fitted_notes(), "split=ALT");

    lp::StumpRegressor constant;
    constant.fit(from_xy({1, 2, 3}, {7, 7, 7}));
    EXPECT_EQ(constant.fitted_notes(), "constant");

    lp::SimpleLinearRegressor slr;
    slr.fit(d);
    EXPECT_EQ(slr.name(), "Simple Linear Regression");
    EXPECT_EQ(slr.fitted_notes(), "feature=ALT");

    lp::KnnRegressor knn(3);
    knn.fit(d);
    EXPECT_EQ(knn.name(), "KNN, N=3");
}

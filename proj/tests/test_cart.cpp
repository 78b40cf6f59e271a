#include <gtest/gtest.h>

#include <map>

#include "cfx/cart.hpp"
#include "cfx/instances.hpp"
#include "cfx/io.hpp"
#include "support.hpp"

using namespace cfx;
using namespace cfx::test;

namespace {

std::string to_string_for_test(const TreeModel& t) { return to_json(Model(t)).dump(); }

double gini(const std::map<Label, int>& counts, int n) {
    if (n == 0) return 0.0;
    double g = 1.0;
    for (auto [_, c] : counts) g -= (double(c) / n) * (double(c) / n);
    return g;
}

double weighted_child_gini(const LabeledData& d, const SplitTest& t) {
    std::map<Label, int> l, r;
    int nl = 0, nr = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (t.goes_left(d.points[i])) {
            ++l[d.labels[i]];
            ++nl;
        } else {
            ++r[d.labels[i]];
            ++nr;
        }
    }
    if (nl == 0 || nr == 0) return 1e9;
    int n = nl + nr;
    return (nl * gini(l, nl) + nr * gini(r, nr)) / n;
}

// Smallest weighted child impurity over every grid threshold and every
// single-category test.
double best_root_impurity(const FeatureSchema& s, const LabeledData& d) {
    double best = 1e9;
    for (std::size_t f = 0; f < s.size(); ++f) {
        SplitTest t;
        t.feature = f;
        if (s[f].is_categorical()) {
            t.categorical = true;
            for (int c = 0; c < s[f].category_count(); ++c) {
                t.left_categories = CategorySet{1} << c;
                best = std::min(best, weighted_child_gini(d, t));
            }
        } else {
            for (GridIndex th = 0; th < s[f].max_index(); ++th) {
                t.threshold = th;
                best = std::min(best, weighted_child_gini(d, t));
            }
        }
    }
    return best;
}

LabeledData sample_target(const Model& target, std::size_t n, std::uint64_t seed, double noise = 0.0) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    LabeledData d;
    for (std::size_t i = 0; i < n; ++i) {
        Point p = sample_uniform(target.schema().full_region(), rng);
        Label y = target.predict(p);
        if (u(rng) < noise) y = 1 - y;
        d.add(p, y);
    }
    return d;
}

LabeledData xor_data(const FeatureSchema& s) {
    LabeledData d;
    for (double a : {0.2, 0.2, 0.8, 0.8})
        for (double b : {0.2, 0.8}) d.add(at(s, {a, b}), (a < 0.5) != (b < 0.5));
    return d;
}

} // namespace

TEST(Cart, PureDataGivesASingleLeaf) {
    auto s = unit_square(0.1);
    LabeledData d;
    d.add(at(*s, {0.1, 0.1}), 1);
    d.add(at(*s, {0.9, 0.3}), 1);
    TreeModel t = train_tree(s, d);
    EXPECT_EQ(t.nodes().size(), 1u);
    EXPECT_EQ(t.predict(at(*s, {0.5, 0.5})), 1);
}

TEST(Cart, SeparableDataSplitsAtTheGridMidpoint) {
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1, 0.1)});
    LabeledData d;
    d.add(at(*s, {0.2}), 0);
    d.add(at(*s, {0.6}), 1);
    TreeModel t = train_tree(s, d);
    const auto& root = t.nodes()[t.root()];
    ASSERT_FALSE(root.leaf);
    EXPECT_EQ(root.test.threshold, 4);
    d = {};
    d.add(at(*s, {0.2}), 0);
    d.add(at(*s, {0.5}), 1);
    t = train_tree(s, d);
    EXPECT_EQ(t.nodes()[t.root()].test.threshold, 3);
}

TEST(Cart, XorIsLearnedAtDepthTwoDespiteZeroGainAtTheRoot) {
    auto s = unit_square(0.1);
    LabeledData d = xor_data(*s);
    TrainConfig cfg;
    cfg.max_depth = 2;
    TreeModel t = train_tree(s, d, cfg);
    EXPECT_DOUBLE_EQ(accuracy(Model(t), d), 1.0);
    EXPECT_EQ(stats(Model(t)).depth, 2);
    cfg.max_depth = 1;
    EXPECT_DOUBLE_EQ(accuracy(Model(train_tree(s, d, cfg)), d), 0.5);
}

TEST(Cart, RootSplitMatchesExhaustiveGiniSearch) {
    for (const auto& s : mixed_schemas()) {
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            Model target(gen_random_tree(s, 4, seed));
            LabeledData d = sample_target(target, 150, seed + 40, 0.1);
            TrainConfig cfg;
            cfg.max_depth = 1;
            TreeModel t = train_tree(s, d, cfg);
            const auto& root = t.nodes()[t.root()];
            ASSERT_FALSE(root.leaf);
            EXPECT_NEAR(weighted_child_gini(d, root.test), best_root_impurity(*s, d), 1e-12);
        }
    }
}

TEST(Cart, UnlimitedDepthFitsConsistentData) {
    for (const auto& s : mixed_schemas()) {
        Model target(gen_random_tree(s, 6, 3, 3));
        LabeledData d = sample_target(target, 400, 8);
        EXPECT_DOUBLE_EQ(accuracy(Model(train_tree(s, d)), d), 1.0);
    }
}

TEST(Cart, MaxDepthAndMinSamplesAreHonored) {
    auto s = mixed_schemas()[3];
    Model target(gen_random_tree(s, 8, 5));
    LabeledData d = sample_target(target, 500, 2, 0.2);
    TrainConfig cfg;
    cfg.max_depth = 3;
    EXPECT_LE(stats(Model(train_tree(s, d, cfg))).depth, 3);
    cfg.max_depth.reset();
    cfg.min_samples_split = 1000;
    EXPECT_EQ(train_tree(s, d, cfg).nodes().size(), 1u);
}

TEST(Cart, TrainingIsDeterministic) {
    auto s = mixed_schemas()[2];
    Model target(gen_random_tree(s, 6, 1));
    LabeledData d = sample_target(target, 300, 3, 0.1);
    TrainConfig cfg;
    cfg.n_trees = 5;
    cfg.seed = 9;
    EXPECT_EQ(to_string_for_test(train_tree(s, d)), to_string_for_test(train_tree(s, d)));
    ForestModel a = train_forest(s, d, cfg), b = train_forest(s, d, cfg);
    ASSERT_EQ(a.trees().size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(to_string_for_test(a.trees()[i]), to_string_for_test(b.trees()[i]));
}

TEST(Cart, SingleUnbaggedForestTreeWithAllAxesEqualsTheTree) {
    for (const auto& s : mixed_schemas()) {
        Model target(gen_random_tree(s, 5, 6));
        LabeledData d = sample_target(target, 300, 1, 0.05);
        TrainConfig cfg;
        cfg.n_trees = 1;
        cfg.bootstrap = false;
        cfg.max_features = s->axis_count();
        ForestModel f = train_forest(s, d, cfg);
        EXPECT_EQ(to_string_for_test(f.trees()[0]), to_string_for_test(train_tree(s, d, cfg)));
    }
}

TEST(Cart, PruningAtZeroKeepsInformativeSplitsAndLargeAlphaGivesTheMajority) {
    auto s = unit_square(0.1);
    LabeledData d = xor_data(*s);
    d.add(at(*s, {0.2, 0.2}), 0);
    TreeModel t = train_tree(s, d);
    EXPECT_EQ(to_string_for_test(prune_ccp(t, d, 0.0)), to_string_for_test(t));
    TreeModel stump = prune_ccp(t, d, 10.0);
    EXPECT_EQ(stump.nodes()[stump.root()].leaf, true);
    EXPECT_EQ(stump.predict(at(*s, {0.5, 0.5})), 0);
}

TEST(Cart, PruneChoosesTheBestValidationAlpha) {
    auto s = mixed_schemas()[1];
    Model target(gen_random_tree(s, 4, 12));
    LabeledData train = sample_target(target, 400, 1, 0.25);
    LabeledData val = sample_target(target, 200, 2, 0.25);
    TreeModel full = train_tree(s, train);
    TreeModel best = prune(full, train, val);
    double best_acc = 0;
    for (double a : default_ccp_grid()) best_acc = std::max(best_acc, accuracy(Model(prune_ccp(full, train, a)), val));
    EXPECT_DOUBLE_EQ(accuracy(Model(best), val), best_acc);
    EXPECT_GE(accuracy(Model(best), val), accuracy(Model(full), val));
    EXPECT_LT(best.nodes().size(), full.nodes().size());
}

TEST(Cart, DefaultCcpGrid) {
    auto g = default_ccp_grid();
    ASSERT_EQ(g.size(), 50u);
    EXPECT_DOUBLE_EQ(g.front(), 0.0);
    EXPECT_DOUBLE_EQ(g.back(), 0.2);
}

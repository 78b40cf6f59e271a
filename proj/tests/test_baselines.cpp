#include <gtest/gtest.h>

#include "cfx/baselines.hpp"
#include "cfx/errors.hpp"
#include "cfx/eval.hpp"
#include "cfx/instances.hpp"
#include "support.hpp"

using namespace cfx;
using namespace cfx::test;

namespace {

Model single_split(SchemaPtr s) {
    TreeModel m(s, 2);
    int a = m.add_leaf(0), b = m.add_leaf(1);
    m.set_root(m.add_split(le(0, (*s)[0].snap(0.5)), a, b));
    return Model(m);
}

} // namespace

TEST(LeafIdOracle, ReportsLeafAndCountsCalls) {
    auto s = unit_square(0.1);
    Model m = single_split(s);
    LeafIdOracle o(m);
    auto a = o.query(at(*s, {0.1, 0.1}));
    auto b = o.query(at(*s, {0.9, 0.1}));
    EXPECT_NE(a.leaf, b.leaf);
    EXPECT_EQ(a.label, 0);
    EXPECT_EQ(b.label, 1);
    EXPECT_EQ(o.count(), 2u);
}

TEST(LeafIdOracle, RejectsForests) {
    auto s = unit_square(0.1);
    EXPECT_THROW(LeafIdOracle(Model(gen_random_forest(s, 2, 2, 0))), ContractError);
}

TEST(PathFinding, RecoversTreesExactly) {
    for (const auto& s : small_schemas()) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            Model target(gen_random_tree(s, 5, seed, 3));
            LeafIdOracle o(target);
            PathFindingResult r = pathfinding_extract(o);
            EXPECT_EQ(r.queries, o.count());
            EXPECT_FALSE(brute_force_disagreement(target, Model(r.model)));
            EXPECT_EQ(r.boxes, leaf_regions(target.tree(), s->full_region()).size());
        }
    }
    for (const auto& s : mixed_schemas()) {
        Model target(gen_random_tree(s, 6, 2));
        LeafIdOracle o(target);
        EXPECT_TRUE(functional_equivalence(target, Model(pathfinding_extract(o).model)).equivalent);
    }
}

TEST(PathFinding, SingleSplitQueryCount) {
    // Two boxes; each probes both ends of both axes, plus bisection on the split axis.
    auto s = unit_square(1.0 / 8);
    Model target = single_split(s);
    LeafIdOracle o(target);
    PathFindingResult r = pathfinding_extract(o);
    EXPECT_EQ(r.boxes, 2u);
    EXPECT_TRUE(functional_equivalence(target, Model(r.model)).equivalent);
    EXPECT_GT(r.queries, 3u);
}

TEST(PathFinding, CoarsePrecisionUnderReachesAndReseedsTheGap) {
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1, 1.0 / 64)});
    TreeModel t(s, 2);
    int a = t.add_leaf(0), b = t.add_leaf(1);
    t.set_root(t.add_split(le(0, 37), a, b));
    LeafIdOracle o{Model(t)};
    PathFindingResult exact = pathfinding_extract(o, 1e-9);
    EXPECT_TRUE(functional_equivalence(Model(t), Model(exact.model)).equivalent);
    LeafIdOracle o2{Model(t)};
    PathFindingResult coarse = pathfinding_extract(o2, 0.25);
    EXPECT_EQ(exact.boxes, 2u);
    EXPECT_GT(coarse.boxes, 2u);
    EXPECT_TRUE(functional_equivalence(Model(t), Model(coarse.model)).equivalent);
}

TEST(CfAttack, RespectsBudgetAndNeverCertifies) {
    auto s = mixed_schemas()[1];
    Model target(gen_random_tree(s, 5, 3));
    ExactOracle o(target);
    AttackConfig cfg;
    cfg.budget = 57;
    cfg.seed = 2;
    AttackResult r = cf_attack(o, cfg);
    EXPECT_EQ(r.queries, 57u);
    EXPECT_EQ(o.meter().count(), 57u);
    EXPECT_FALSE(r.certified);
    EXPECT_GE(r.dataset.size(), 57u);
    EXPECT_EQ(r.snapshots.front().queries, 0u);
    EXPECT_EQ(r.snapshots.back().queries, 57u);
    for (std::size_t i = 1; i < r.snapshots.size(); ++i)
        EXPECT_GT(r.snapshots[i].queries, r.snapshots[i - 1].queries);
}

TEST(CfAttack, DatasetLabelsAgreeWithTheTarget) {
    for (int classes : {2, 3}) {
        auto s = mixed_schemas()[2];
        Model target(gen_random_tree(s, 5, 4, classes));
        ExactOracle o(target);
        AttackConfig cfg;
        cfg.budget = 80;
        for (auto* attack : {&cf_attack, &dualcf_attack}) {
            AttackResult r = (*attack)(o, cfg);
            for (std::size_t i = 0; i < r.dataset.size(); ++i)
                EXPECT_EQ(r.dataset.labels[i], target.predict(r.dataset.points[i]));
        }
    }
}

TEST(CfAttack, SingleSplitIsLearnedFromCounterfactualPairs) {
    auto s = unit_square();
    Model target = single_split(s);
    for (auto* attack : {&cf_attack, &dualcf_attack}) {
        ExactOracle o(target);
        AttackConfig cfg;
        cfg.budget = 40;
        AttackResult r = (*attack)(o, cfg);
        EXPECT_TRUE(functional_equivalence(target, r.model).equivalent);
    }
}

TEST(CfAttack, SeededRunsAreReproducible) {
    auto s = mixed_schemas()[3];
    Model target(gen_random_tree(s, 6, 8));
    AttackConfig cfg;
    cfg.budget = 100;
    cfg.seed = 13;
    ExactOracle a(target), b(target);
    AttackResult ra = dualcf_attack(a, cfg), rb = dualcf_attack(b, cfg);
    EXPECT_EQ(ra.dataset.points, rb.dataset.points);
    EXPECT_TRUE(functional_equivalence(ra.model, rb.model).equivalent);
}

TEST(CfAttack, ForestSurrogate) {
    auto s = mixed_schemas()[1];
    Model target(gen_random_forest(s, 3, 3, 1));
    ExactOracle o(target);
    AttackConfig cfg;
    cfg.budget = 60;
    cfg.surrogate = SurrogateKind::kForest;
    cfg.train.n_trees = 4;
    AttackResult r = cf_attack(o, cfg);
    EXPECT_FALSE(r.model.is_tree());
    EXPECT_GT(fidelity(target, r.model, 2000, 3).fidelity, 0.5);
}

TEST(CfAttack, DefaultBudgetIsFiftyPerNode) {
    auto s = unit_square();
    EXPECT_EQ(default_budget(single_split(s)), 150u);
    EXPECT_THROW(
        [&] {
            ExactOracle o(single_split(s));
            cf_attack(o, AttackConfig{});
        }(),
        ContractError);
}

TEST(PathFinding, SingleLeafNeedsTwoProbesPerAxis) {
    auto s = unit_square();
    TreeModel t(s, 2);
    t.set_root(t.add_leaf(1));
    LeafIdOracle o{Model(t)};
    PathFindingResult r = pathfinding_extract(o);
    EXPECT_EQ(r.queries, 1u + 2u * 2u);
    EXPECT_EQ(r.boxes, 1u);
}

TEST(CfAttack, ConstantTargetGivesAConstantSurrogate) {
    auto s = unit_square();
    TreeModel t(s, 2);
    t.set_root(t.add_leaf(1));
    ExactOracle o{Model(t)};
    AttackConfig cfg;
    cfg.budget = 30;
    AttackResult r = cf_attack(o, cfg);
    EXPECT_EQ(r.dataset.size(), 30u);
    EXPECT_DOUBLE_EQ(fidelity(Model(t), r.model).fidelity, 1.0);
}

TEST(CfAttack, BudgetOfOneTrainsOnAtMostTwoPoints) {
    auto s = unit_square();
    Model target = single_split(s);
    ExactOracle o(target);
    AttackConfig cfg;
    cfg.budget = 1;
    AttackResult r = cf_attack(o, cfg);
    EXPECT_EQ(r.queries, 1u);
    EXPECT_LE(r.dataset.size(), 2u);
    EXPECT_GE(fidelity(target, r.model).fidelity, 0.45);
}

TEST(DualCf, EachRoundBillsTwoQueries) {
    auto s = unit_square();
    Model target = single_split(s);
    ExactOracle o(target);
    AttackConfig cfg;
    cfg.budget = 40;
    AttackResult r = dualcf_attack(o, cfg);
    EXPECT_EQ(r.queries, 40u);
    // Per round: the sample, its counterfactual and the counterfactual's counterfactual.
    EXPECT_EQ(r.dataset.size(), 60u);
}

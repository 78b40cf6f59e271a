#include "cfx/instances.hpp"

#include <algorithm>
#include <cmath>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

int build_random(TreeModel& t, const Region& r, int depth, int num_classes, Rng& rng) {
    std::uniform_int_distribution<int> label(0, num_classes - 1);
    std::vector<std::size_t> splittable;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i].cardinality() >= 2) splittable.push_back(i);
    if (depth == 0 || splittable.empty()) return t.add_leaf(label(rng));

    std::uniform_int_distribution<std::size_t> pick_feature(0, splittable.size() - 1);
    std::size_t f = splittable[pick_feature(rng)];
    SplitTest test;
    test.feature = f;
    Region left = r;
    Region right = r;
    if (r[f].categorical) {
        std::vector<int> cats;
        for (int c = 0; c < kMaxCategories; ++c)
            if (r[f].contains(c)) cats.push_back(c);
        std::uniform_int_distribution<std::size_t> pick(0, cats.size() - 1);
        CategorySet chosen = CategorySet{1} << cats[pick(rng)];
        test.categorical = true;
        test.left_categories = chosen;
        left[f].categories = chosen;
        right[f].categories &= ~chosen;
    } else {
        std::uniform_int_distribution<GridIndex> pick(r[f].lo, r[f].hi - 1);
        test.threshold = pick(rng);
        left[f].hi = test.threshold;
        right[f].lo = test.threshold + 1;
    }
    int l = build_random(t, left, depth - 1, num_classes, rng);
    int rr = build_random(t, right, depth - 1, num_classes, rng);
    return t.add_split(test, l, rr);
}

bool boxes_adjacent(const Region& a, const Region& b) {
    int touching = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].hi + 1 == b[i].lo || b[i].hi + 1 == a[i].lo)
            ++touching;
        else if (a[i].hi < b[i].lo || b[i].hi < a[i].lo)
            return false;
    }
    return touching == 1;
}

} // namespace

FeatureSchema unit_schema(int m, double delta) {
    std::vector<FeatureSpec> f;
    for (int i = 0; i < m; ++i) f.push_back(FeatureSpec::numeric("x" + std::to_string(i + 1), 0.0, 1.0, delta));
    return FeatureSchema(std::move(f));
}

TreeModel gen_random_tree(SchemaPtr schema, int depth, std::uint64_t seed, int num_classes) {
    if (depth < 0) throw ContractError("tree depth must be >= 0");
    if (num_classes < 2) throw ContractError("need at least two classes");
    Rng rng(seed);
    TreeModel t(schema, num_classes);
    t.set_root(build_random(t, schema->full_region(), depth, num_classes, rng));
    std::vector<int> leaves;
    for (std::size_t i = 0; i < t.nodes().size(); ++i)
        if (t.nodes()[i].leaf) leaves.push_back(static_cast<int>(i));
    bool uniform = std::all_of(leaves.begin(), leaves.end(),
                               [&](int i) { return t.node(i).label == t.node(leaves[0]).label; });
    if (uniform && leaves.size() >= 2) t.node(leaves.back()).label = (t.node(leaves.back()).label + 1) % num_classes;
    return t;
}

ForestModel gen_random_forest(SchemaPtr schema, int n_trees, int depth, std::uint64_t seed, int num_classes) {
    if (n_trees < 1) throw ContractError("forest needs at least one tree");
    std::vector<TreeModel> trees;
    Rng seeds(seed);
    for (int i = 0; i < n_trees; ++i) trees.push_back(gen_random_tree(schema, depth, seeds(), num_classes));
    return ForestModel(schema, num_classes, std::move(trees));
}

TreeModel gen_chessboard(SchemaPtr schema, const std::vector<int>& s) {
    const auto& sc = *schema;
    if (s.size() != sc.size()) throw ContractError("chessboard needs one split count per feature");
    std::vector<std::vector<FeatureRange>> cuts(sc.size());
    for (std::size_t i = 0; i < sc.size(); ++i) {
        if (s[i] < 0) throw ContractError("split counts must be >= 0");
        if (sc[i].is_categorical()) {
            if (s[i] != 0) throw ContractError("chessboard splits need interval features");
            cuts[i].push_back(sc.full_region()[i]);
            continue;
        }
        GridIndex k = sc[i].max_index();
        GridIndex lo = 0;
        for (int p = 1; p <= s[i]; ++p) {
            GridIndex t = p * k / (s[i] + 1);
            if (t < lo || t >= k) throw ContractError("grid too coarse for " + std::to_string(s[i]) + " splits");
            cuts[i].push_back(FeatureRange::interval(lo, t));
            lo = t + 1;
        }
        cuts[i].push_back(FeatureRange::interval(lo, k));
    }
    std::vector<LabeledBox> boxes;
    std::vector<std::size_t> idx(sc.size(), 0);
    while (true) {
        Region r;
        std::size_t parity = 0;
        for (std::size_t i = 0; i < sc.size(); ++i) {
            r.ranges.push_back(cuts[i][idx[i]]);
            parity += idx[i];
        }
        boxes.push_back({r, static_cast<Label>(parity % 2)});
        std::size_t i = 0;
        for (; i < sc.size(); ++i) {
            if (++idx[i] < cuts[i].size()) break;
            idx[i] = 0;
        }
        if (i == sc.size()) break;
    }
    return boxes_to_tree(schema, boxes, 2);
}

std::vector<std::vector<GridIndex>> adversarial_levels(const AdversarialSpec& spec) {
    const auto m = spec.s.size();
    if (m == 0) throw ContractError("adversarial instance needs at least one dimension");
    for (std::size_t j = 0; j < m; ++j) {
        if (spec.s[j] < 0) throw ContractError("split counts must be >= 0");
        if (j > 0 && spec.s[j] > spec.s[j - 1]) throw ContractError("split counts must be non-increasing");
    }
    const double eps = spec.epsilon.value_or(2 * spec.delta);
    if (eps <= 0) throw ContractError("epsilon must be positive");
    const auto k = static_cast<GridIndex>(std::llround(1.0 / spec.delta));
    std::vector<std::vector<GridIndex>> levels(m);
    for (std::size_t j = 0; j < m; ++j) {
        for (int q = 1; q <= spec.s[j]; ++q) {
            double alpha = j == 0 ? static_cast<double>(q) / (spec.s[0] + 1)
                                  : static_cast<double>(q) / (2.0 * (spec.s[j] + 1)) + 0.5 + eps;
            auto t = static_cast<GridIndex>(std::floor(alpha * static_cast<double>(k) + 1e-9));
            GridIndex prev = levels[j].empty() ? (j == 0 ? 0 : k / 2) : levels[j].back() + 1;
            if (t < prev || t >= k)
                throw ContractError("adversarial levels collide on the grid; use a finer delta or smaller epsilon");
            levels[j].push_back(t);
        }
    }
    return levels;
}

TreeModel gen_adversarial(const AdversarialSpec& spec) {
    auto levels = adversarial_levels(spec);
    auto schema = std::make_shared<const FeatureSchema>(unit_schema(static_cast<int>(spec.s.size()), spec.delta));

    // Branch: last dimension first, highest level first, always continuing
    // on the low side; each split peels its upper side into a leaf.
    TreeModel t(schema, 2);
    t.set_root(t.add_leaf(0));
    int slot = t.root();
    std::vector<int> leaves;
    for (std::size_t j = levels.size(); j-- > 0;) {
        for (auto it = levels[j].rbegin(); it != levels[j].rend(); ++it) {
            SplitTest test;
            test.feature = j;
            test.threshold = *it;
            int peel = t.add_leaf(0);
            int rest = t.add_leaf(0);
            t.make_split(slot, test, rest, peel);
            leaves.push_back(peel);
            slot = rest;
        }
    }
    leaves.push_back(slot);

    std::vector<Region> boxes(t.nodes().size());
    for (const auto& lr : leaf_regions(t)) boxes[static_cast<std::size_t>(lr.node)] = lr.region;
    std::vector<Label> assigned;
    Label max_label = 1;
    for (std::size_t a = 0; a < leaves.size(); ++a) {
        Label label = 0;
        if (spec.labels == LabelScheme::kAlternating) {
            label = static_cast<Label>(a % 2);
        } else {
            std::vector<bool> used(leaves.size() + 1, false);
            for (std::size_t b = 0; b < a; ++b)
                if (boxes_adjacent(boxes[static_cast<std::size_t>(leaves[a])], boxes[static_cast<std::size_t>(leaves[b])]))
                    used[static_cast<std::size_t>(assigned[b])] = true;
            while (used[static_cast<std::size_t>(label)]) ++label;
        }
        assigned.push_back(label);
        max_label = std::max(max_label, label);
    }
    TreeModel out(schema, max_label + 1);
    for (const auto& n : t.nodes()) {
        if (n.leaf)
            out.add_leaf(0);
        else
            out.add_split(n.test, n.left, n.right);
    }
    for (std::size_t a = 0; a < leaves.size(); ++a) out.node(leaves[a]).label = assigned[a];
    out.set_root(t.root());
    out.validate();
    return out;
}

} // namespace cfx

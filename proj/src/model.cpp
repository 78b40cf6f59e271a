#include "cfx/model.hpp"

#include <algorithm>
#include <bit>
#include <optional>
#include <set>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

enum class Side { kLeft, kRight, kBoth };

Side classify(const SplitTest& t, const Region& r) {
    const auto& fr = r[t.feature];
    if (t.categorical) {
        if ((fr.categories & ~t.left_categories) == 0) return Side::kLeft;
        if ((fr.categories & t.left_categories) == 0) return Side::kRight;
        return Side::kBoth;
    }
    if (fr.hi <= t.threshold) return Side::kLeft;
    if (fr.lo > t.threshold) return Side::kRight;
    return Side::kBoth;
}

std::pair<Region, Region> cut(const SplitTest& t, const Region& r) {
    Region left = r;
    Region right = r;
    if (t.categorical) {
        left[t.feature].categories &= t.left_categories;
        right[t.feature].categories &= ~t.left_categories;
    } else {
        left[t.feature].hi = std::min(left[t.feature].hi, t.threshold);
        right[t.feature].lo = std::max(right[t.feature].lo, t.threshold + 1);
    }
    return {std::move(left), std::move(right)};
}

} // namespace

TreeModel::TreeModel(SchemaPtr schema, int num_classes) : schema_(std::move(schema)), num_classes_(num_classes) {
    if (!schema_) throw ContractError("tree needs a schema");
    if (num_classes_ < 1) throw ContractError("tree needs at least one class");
}

TreeModel TreeModel::constant(SchemaPtr schema, Label label, int num_classes) {
    TreeModel t(std::move(schema), num_classes);
    t.set_root(t.add_leaf(label));
    return t;
}

int TreeModel::add_leaf(Label label) {
    TreeNode n;
    n.label = label;
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
}

int TreeModel::add_split(const SplitTest& test, int left, int right) {
    TreeNode n;
    n.leaf = false;
    n.test = test;
    n.left = left;
    n.right = right;
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
}

void TreeModel::make_split(int index, const SplitTest& test, int left, int right) {
    auto& n = node(index);
    n.leaf = false;
    n.test = test;
    n.left = left;
    n.right = right;
}

int TreeModel::leaf_index(const Point& x) const {
    int i = root_;
    while (!nodes_[static_cast<std::size_t>(i)].leaf) {
        const auto& n = nodes_[static_cast<std::size_t>(i)];
        i = n.test.goes_left(x) ? n.left : n.right;
    }
    return i;
}

void TreeModel::validate() const {
    if (nodes_.empty()) throw ContractError("tree has no nodes");
    auto count = static_cast<int>(nodes_.size());
    if (root_ < 0 || root_ >= count) throw ContractError("tree root out of range");
    std::vector<int> seen(nodes_.size(), 0);
    std::vector<int> stack{root_};
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        if (seen[static_cast<std::size_t>(i)]++) throw ContractError("tree node reachable twice");
        const auto& n = node(i);
        if (n.leaf) {
            if (n.label != kUnknownLabel && (n.label < 0 || n.label >= num_classes_))
                throw ContractError("leaf label outside [0, num_classes)");
            continue;
        }
        if (n.left < 0 || n.left >= count || n.right < 0 || n.right >= count)
            throw ContractError("tree child index out of range");
        if (n.test.feature >= schema_->size()) throw ContractError("split feature out of range");
        const auto& f = (*schema_)[n.test.feature];
        if (n.test.categorical != f.is_categorical()) throw ContractError("split kind does not match feature kind");
        stack.push_back(n.left);
        stack.push_back(n.right);
    }
}

ForestModel::ForestModel(SchemaPtr schema, int num_classes, std::vector<TreeModel> trees)
    : schema_(std::move(schema)), num_classes_(num_classes), trees_(std::move(trees)) {
    if (trees_.empty()) throw ContractError("forest needs at least one tree");
    for (const auto& t : trees_)
        if (!(t.schema() == *schema_)) throw ContractError("forest trees must share one schema");
}

Label ForestModel::vote(std::span<const Label> labels) const {
    std::vector<int> votes(static_cast<std::size_t>(num_classes_), 0);
    for (Label l : labels)
        if (l >= 0 && l < num_classes_) ++votes[static_cast<std::size_t>(l)];
    return static_cast<Label>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

Label ForestModel::predict(const Point& x) const {
    std::vector<Label> labels;
    labels.reserve(trees_.size());
    for (const auto& t : trees_) labels.push_back(t.predict(x));
    return vote(labels);
}

Label Model::predict(const Point& x) const {
    return std::visit([&](const auto& m) { return m.predict(x); }, m_);
}

const TreeModel& Model::tree() const {
    if (!is_tree()) throw ContractError("model is a forest, not a single tree");
    return std::get<TreeModel>(m_);
}

const ForestModel& Model::forest() const {
    if (is_tree()) throw ContractError("model is a single tree, not a forest");
    return std::get<ForestModel>(m_);
}

const FeatureSchema& Model::schema() const {
    return std::visit([](const auto& m) -> const FeatureSchema& { return m.schema(); }, m_);
}

const SchemaPtr& Model::schema_ptr() const {
    return std::visit([](const auto& m) -> const SchemaPtr& { return m.schema_ptr(); }, m_);
}

int Model::num_classes() const {
    return std::visit([](const auto& m) { return m.num_classes(); }, m_);
}

std::vector<const TreeModel*> Model::trees() const {
    if (is_tree()) return {&std::get<TreeModel>(m_)};
    std::vector<const TreeModel*> out;
    for (const auto& t : std::get<ForestModel>(m_).trees()) out.push_back(&t);
    return out;
}

Label Model::combine(std::span<const Label> labels) const {
    if (is_tree()) return labels.front();
    return std::get<ForestModel>(m_).vote(labels);
}

ModelStats stats(const Model& model) {
    const auto& schema = model.schema();
    std::set<std::pair<int, GridIndex>> levels;
    ModelStats st;
    st.s.assign(static_cast<std::size_t>(schema.axis_count()), 0);
    for (const TreeModel* t : model.trees()) {
        std::vector<std::pair<int, int>> stack{{t->root(), 0}};
        while (!stack.empty()) {
            auto [i, d] = stack.back();
            stack.pop_back();
            const auto& n = t->node(i);
            ++st.node_count;
            if (n.leaf) {
                ++st.leaf_count;
                st.depth = std::max(st.depth, d);
                continue;
            }
            int base = schema.first_axis(n.test.feature);
            if (n.test.categorical) {
                int k = schema[n.test.feature].category_count();
                CategorySet all = k >= kMaxCategories ? ~CategorySet{0} : (CategorySet{1} << k) - 1;
                CategorySet side = n.test.left_categories & all;
                if (std::popcount(side) * 2 > k) side = all & ~side;
                for (int c = 0; c < k; ++c)
                    if (side & (CategorySet{1} << c)) levels.insert({base + c, 0});
            } else {
                levels.insert({base, n.test.threshold});
            }
            stack.push_back({n.left, d + 1});
            stack.push_back({n.right, d + 1});
        }
    }
    for (const auto& [axis, t] : levels) ++st.s[static_cast<std::size_t>(axis)];
    st.n = static_cast<int>(levels.size());
    return st;
}

std::vector<LeafRegion> leaf_regions(const TreeModel& tree) {
    return leaf_regions(tree, tree.schema().full_region());
}

std::vector<LeafRegion> leaf_regions(const TreeModel& tree, const Region& within) {
    std::vector<LeafRegion> out;
    if (within.empty()) return out;
    std::vector<std::pair<int, Region>> stack{{tree.root(), within}};
    while (!stack.empty()) {
        auto [i, r] = std::move(stack.back());
        stack.pop_back();
        const auto& n = tree.node(i);
        if (n.leaf) {
            out.push_back({std::move(r), n.label, i});
            continue;
        }
        switch (classify(n.test, r)) {
        case Side::kLeft: stack.emplace_back(n.left, std::move(r)); break;
        case Side::kRight: stack.emplace_back(n.right, std::move(r)); break;
        case Side::kBoth: {
            auto [l, rr] = cut(n.test, r);
            stack.emplace_back(n.right, std::move(rr));
            stack.emplace_back(n.left, std::move(l));
            break;
        }
        }
    }
    return out;
}

namespace {

struct BoxTreeBuilder {
    TreeModel& tree;

    int build(const Region& region, std::vector<LabeledBox> boxes) {
        bool uniform = std::all_of(boxes.begin(), boxes.end(),
                                   [&](const LabeledBox& b) { return b.label == boxes.front().label; });
        if (uniform) return tree.add_leaf(boxes.front().label);

        std::optional<SplitTest> fallback;
        std::optional<SplitTest> chosen;
        for (std::size_t f = 0; f < region.size() && !chosen; ++f) {
            for (const auto& cand : candidates(region, boxes, f)) {
                bool clean = std::all_of(boxes.begin(), boxes.end(), [&](const LabeledBox& b) {
                    return classify(cand, b.region) != Side::kBoth;
                });
                if (clean) {
                    chosen = cand;
                    break;
                }
                if (!fallback) fallback = cand;
            }
        }
        if (!chosen) chosen = fallback;
        if (!chosen) throw ContractError("boxes_to_tree: differently labeled boxes cannot be separated");

        auto [lr, rr] = cut(*chosen, region);
        std::vector<LabeledBox> lb, rb;
        for (auto& b : boxes) {
            auto [l, r] = cut(*chosen, b.region);
            if (!l.empty()) lb.push_back({l, b.label});
            if (!r.empty()) rb.push_back({r, b.label});
        }
        int left = build(lr, std::move(lb));
        int right = build(rr, std::move(rb));
        return tree.add_split(*chosen, left, right);
    }

    static std::vector<SplitTest> candidates(const Region& region, const std::vector<LabeledBox>& boxes,
                                             std::size_t f) {
        std::vector<SplitTest> out;
        const auto& fr = region[f];
        if (fr.categorical) {
            std::set<CategorySet> seen;
            for (const auto& b : boxes) {
                CategorySet s = b.region[f].categories & fr.categories;
                if (s != 0 && s != fr.categories && seen.insert(s).second) {
                    SplitTest t;
                    t.feature = f;
                    t.categorical = true;
                    t.left_categories = s;
                    out.push_back(t);
                }
            }
        } else {
            std::set<GridIndex> seen;
            for (const auto& b : boxes) {
                GridIndex h = b.region[f].hi;
                if (h >= fr.lo && h < fr.hi) seen.insert(h);
            }
            for (GridIndex h : seen) {
                SplitTest t;
                t.feature = f;
                t.threshold = h;
                out.push_back(t);
            }
        }
        return out;
    }
};

} // namespace

TreeModel boxes_to_tree(SchemaPtr schema, const std::vector<LabeledBox>& boxes, int num_classes) {
    if (boxes.empty()) throw ContractError("boxes_to_tree: no boxes");
    GridVolume covered = 0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        schema->check_region(boxes[i].region);
        covered += grid_volume(boxes[i].region);
        for (std::size_t j = i + 1; j < boxes.size(); ++j)
            if (!boxes[i].region.intersect(boxes[j].region).empty())
                throw ContractError("boxes_to_tree: boxes " + std::to_string(i) + " and " + std::to_string(j) +
                                    " overlap");
    }
    if (covered != schema->total_volume()) throw ContractError("boxes_to_tree: boxes do not cover the domain");

    TreeModel tree(schema, num_classes);
    BoxTreeBuilder builder{tree};
    std::vector<LabeledBox> nonempty;
    for (const auto& b : boxes)
        if (!b.region.empty()) nonempty.push_back(b);
    tree.set_root(builder.build(schema->full_region(), nonempty));
    return tree;
}

std::size_t for_each_cell(std::span<const TreeModel* const> trees, const Region& region, std::size_t cap,
                          const CellVisitor& visit) {
    std::size_t count = 0;
    std::vector<Label> labels(trees.size());
    std::function<void(const Region&, std::vector<int>)> rec = [&](const Region& r, std::vector<int> at) {
        for (std::size_t t = 0; t < trees.size(); ++t) {
            for (;;) {
                const auto& n = trees[t]->node(at[t]);
                if (n.leaf) break;
                Side s = classify(n.test, r);
                if (s == Side::kBoth) break;
                at[t] = s == Side::kLeft ? n.left : n.right;
            }
        }
        for (std::size_t t = 0; t < trees.size(); ++t) {
            const auto& n = trees[t]->node(at[t]);
            if (n.leaf) continue;
            auto [l, rr] = cut(n.test, r);
            rec(l, at);
            rec(rr, std::move(at));
            return;
        }
        if (++count > cap)
            throw CapacityError("cell enumeration exceeded the cap of " + std::to_string(cap) + " cells");
        for (std::size_t t = 0; t < trees.size(); ++t) labels[t] = trees[t]->node(at[t]).label;
        visit(r, labels);
    };
    if (region.empty()) return 0;
    std::vector<int> roots;
    for (const TreeModel* t : trees) roots.push_back(t->root());
    rec(region, std::move(roots));
    return count;
}

} // namespace cfx

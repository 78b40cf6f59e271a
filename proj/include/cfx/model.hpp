#ifndef CFX_MODEL_HPP
#define CFX_MODEL_HPP

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "cfx/schema.hpp"

namespace cfx {

using Label = int;

/// Provisional label of a region whose class has not been observed yet.
inline constexpr Label kUnknownLabel = -1;

struct TreeNode {
    bool leaf = true;
    SplitTest test;
    int left = -1;
    int right = -1;
    Label label = 0;
};

using SchemaPtr = std::shared_ptr<const FeatureSchema>;

/// Axis-parallel decision tree over a quantized schema. A point goes left
/// iff its coordinate is <= the node threshold (or its category is in the
/// node's category set).
class TreeModel {
public:
    TreeModel() = default;
    TreeModel(SchemaPtr schema, int num_classes);

    static TreeModel constant(SchemaPtr schema, Label label, int num_classes);

    int add_leaf(Label label);
    int add_split(const SplitTest& test, int left, int right);
    void set_root(int root) { root_ = root; }

    /// Turns leaf `index` into an internal node in place.
    void make_split(int index, const SplitTest& test, int left, int right);

    Label predict(const Point& x) const { return nodes_[static_cast<std::size_t>(leaf_index(x))].label; }
    /// Index of the leaf reached by `x`.
    int leaf_index(const Point& x) const;

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    TreeNode& node(int i) { return nodes_[static_cast<std::size_t>(i)]; }
    const TreeNode& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    int root() const { return root_; }

    const FeatureSchema& schema() const { return *schema_; }
    const SchemaPtr& schema_ptr() const { return schema_; }
    int num_classes() const { return num_classes_; }

    /// Throws ContractError on dangling children, cycles, or bad labels.
    void validate() const;

private:
    SchemaPtr schema_;
    std::vector<TreeNode> nodes_;
    int root_ = 0;
    int num_classes_ = 2;
};

/// Majority-vote forest; ties go to the lowest class id.
class ForestModel {
public:
    ForestModel() = default;
    ForestModel(SchemaPtr schema, int num_classes, std::vector<TreeModel> trees);

    Label predict(const Point& x) const;
    /// Vote aggregation over per-tree labels.
    Label vote(std::span<const Label> labels) const;

    const std::vector<TreeModel>& trees() const { return trees_; }
    const FeatureSchema& schema() const { return *schema_; }
    const SchemaPtr& schema_ptr() const { return schema_; }
    int num_classes() const { return num_classes_; }

private:
    SchemaPtr schema_;
    int num_classes_ = 2;
    std::vector<TreeModel> trees_;
};

/// A tree or a forest.
class Model {
public:
    Model(TreeModel tree) : m_(std::move(tree)) {}
    Model(ForestModel forest) : m_(std::move(forest)) {}

    Label predict(const Point& x) const;
    bool is_tree() const { return std::holds_alternative<TreeModel>(m_); }
    const TreeModel& tree() const;
    const ForestModel& forest() const;

    const FeatureSchema& schema() const;
    const SchemaPtr& schema_ptr() const;
    int num_classes() const;

    /// Member trees (one for a tree model).
    std::vector<const TreeModel*> trees() const;
    /// Label of the aggregate given one label per member tree.
    Label combine(std::span<const Label> labels) const;

private:
    std::variant<TreeModel, ForestModel> m_;
};

struct ModelStats {
    int n = 0;
    std::vector<int> s;
    int node_count = 0;
    int leaf_count = 0;
    int depth = 0;
};

/// Split levels are distinct (axis, threshold) pairs over all trees.
/// A category-set test counts one level per category on the smaller side
/// of the group (one-hot axis at 0.5).
ModelStats stats(const Model& model);

struct LeafRegion {
    Region region;
    Label label;
    int node;
};

/// Non-empty leaf regions of a tree, in depth-first (left first) order.
std::vector<LeafRegion> leaf_regions(const TreeModel& tree);
std::vector<LeafRegion> leaf_regions(const TreeModel& tree, const Region& within);

struct LabeledBox {
    Region region;
    Label label;
};

/// Builds a tree agreeing with a disjoint, covering box labeling. Throws
/// ContractError if the boxes overlap or leave part of the domain uncovered.
TreeModel boxes_to_tree(SchemaPtr schema, const std::vector<LabeledBox>& boxes, int num_classes);

/// Walks the coarsest common refinement of `trees` inside `region`,
/// calling `visit(cell, leaf_labels)` once per cell on which every tree is
/// constant. Throws CapacityError once more than `cap` cells are produced.
using CellVisitor = std::function<void(const Region&, std::span<const Label>)>;
std::size_t for_each_cell(std::span<const TreeModel* const> trees, const Region& region, std::size_t cap,
                          const CellVisitor& visit);

} // namespace cfx

#endif

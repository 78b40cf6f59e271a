#ifndef CFX_INSTANCES_HPP
#define CFX_INSTANCES_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "cfx/model.hpp"
#include "cfx/schema.hpp"

namespace cfx {

/// m numeric features on [0, 1] with grid step `delta`.
FeatureSchema unit_schema(int m, double delta = 1.0 / 1024);

/// Random axis/threshold recursion to `depth` with random leaf labels;
/// at least two classes appear whenever depth >= 1 and the domain can be split.
TreeModel gen_random_tree(SchemaPtr schema, int depth, std::uint64_t seed, int num_classes = 2);

ForestModel gen_random_forest(SchemaPtr schema, int n_trees, int depth, std::uint64_t seed, int num_classes = 2);

/// Full grid partition with s[i] evenly spaced thresholds on interval
/// feature i; cell labels alternate (parity of the cell index sum).
TreeModel gen_chessboard(SchemaPtr schema, const std::vector<int>& s);

enum class LabelScheme {
    /// Greedy proper coloring: geometrically adjacent leaves never share a label.
    kColoring,
    /// Two labels alternating along the branch.
    kAlternating,
};

struct AdversarialSpec {
    /// Split counts per dimension, non-increasing.
    std::vector<int> s;
    double delta = 1.0 / 1024;
    /// Offset of the upper-half levels; defaults to 2 * delta.
    std::optional<double> epsilon;
    LabelScheme labels = LabelScheme::kColoring;
};

/// Single-branch tree whose levels make the center query of every region
/// hit the lowest dimension with splits left, forcing 2 * prod(s_j + 1) - 1
/// queries from the center-query extraction. Dimension 1 levels sit at
/// p / (s_1 + 1); dimension j > 1 levels at q / (2 (s_j + 1)) + 1/2 + epsilon,
/// all floored onto the grid.
TreeModel gen_adversarial(const AdversarialSpec& spec);

/// Grid threshold indices of the adversarial levels, per dimension.
std::vector<std::vector<GridIndex>> adversarial_levels(const AdversarialSpec& spec);

} // namespace cfx

#endif

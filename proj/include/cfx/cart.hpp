#ifndef CFX_CART_HPP
#define CFX_CART_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "cfx/model.hpp"
#include "cfx/schema.hpp"

namespace cfx {

struct LabeledData {
    std::vector<Point> points;
    std::vector<Label> labels;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    void add(Point p, Label y) {
        points.push_back(std::move(p));
        labels.push_back(y);
    }
};

/// 50 evenly spaced values over [0, 0.2].
std::vector<double> default_ccp_grid();

struct TrainConfig {
    std::optional<int> max_depth;
    int min_samples_split = 2;
    std::vector<double> ccp_grid = default_ccp_grid();
    int n_trees = 1;
    bool bootstrap = true;
    /// Axes examined per split in forests; defaults to ceil(sqrt(axes)).
    std::optional<int> max_features;
    std::uint64_t seed = 0;
    /// Defaults to the largest label + 1 (at least 2).
    std::optional<int> num_classes;
};

/// Greedy Gini induction. Interval thresholds sit at the grid midpoint
/// (rounded down) between consecutive distinct values; categorical splits
/// isolate one category. Ties go to the lowest one-hot axis, then the
/// lowest threshold.
TreeModel train_tree(SchemaPtr schema, const LabeledData& data, const TrainConfig& config = {});

/// Bagged trees with per-split axis subsampling.
ForestModel train_forest(SchemaPtr schema, const LabeledData& data, const TrainConfig& config = {});

/// Minimal cost-complexity pruning at `alpha`, with node impurities weighted
/// by their share of `train`.
TreeModel prune_ccp(const TreeModel& tree, const LabeledData& train, double alpha);

/// Picks the grid alpha with the best validation accuracy (ties go to the
/// larger alpha).
TreeModel prune(const TreeModel& tree, const LabeledData& train, const LabeledData& validation,
                const TrainConfig& config = {});

double accuracy(const Model& model, const LabeledData& data);

} // namespace cfx

#endif

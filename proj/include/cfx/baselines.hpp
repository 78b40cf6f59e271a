#ifndef CFX_BASELINES_HPP
#define CFX_BASELINES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cfx/cart.hpp"
#include "cfx/model.hpp"
#include "cfx/oracle.hpp"
#include "cfx/tra.hpp"

namespace cfx {

struct LeafIdResponse {
    int leaf = 0;
    Label label = 0;
};

/// Metered API exposing the identifier of the leaf a query reaches.
class LeafIdOracle {
public:
    /// Throws ContractError for anything but a single tree.
    explicit LeafIdOracle(const Model& target);

    LeafIdResponse query(const Point& x);
    std::size_t count() const { return count_; }
    const FeatureSchema& schema() const { return target_.schema(); }
    int num_classes() const { return target_.num_classes(); }

private:
    TreeModel target_;
    std::size_t count_ = 0;
};

struct PathFindingResult {
    TreeModel model;
    std::size_t queries = 0;
    /// Leaf boxes discovered (one seed query each).
    std::size_t boxes = 0;
};

/// Recovers leaf boxes by probing each axis from a seed point (domain edge
/// first, then bisection to `epsilon`), seeding the next box from the
/// uncovered remainder until the domain is covered. Precision below the
/// grid step is clamped to the grid step, which makes the result exact.
PathFindingResult pathfinding_extract(LeafIdOracle& oracle, double epsilon = 1e-5);

enum class SurrogateKind { kTree, kForest };

struct AttackConfig {
    std::size_t budget = 0;
    std::uint64_t seed = 0;
    /// Retrain and snapshot every this many queries (0: final only).
    std::size_t snapshot_every = 20;
    SurrogateKind surrogate = SurrogateKind::kTree;
    TrainConfig train;
};

struct AttackResult {
    Model model;
    std::vector<Snapshot> snapshots;
    std::size_t queries = 0;
    LabeledData dataset;
    /// Surrogate attacks never certify equivalence.
    bool certified = false;
};

/// 50 x node count of the target.
std::size_t default_budget(const Model& target);

/// Uniform samples labeled by the oracle, augmented with their counterfactuals.
AttackResult cf_attack(CounterfactualOracle& oracle, const AttackConfig& config);

/// As cf_attack, also querying each counterfactual for its own counterfactual.
AttackResult dualcf_attack(CounterfactualOracle& oracle, const AttackConfig& config);

} // namespace cfx

#endif

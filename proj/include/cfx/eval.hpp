#ifndef CFX_EVAL_HPP
#define CFX_EVAL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cfx/model.hpp"
#include "cfx/schema.hpp"
#include "cfx/tra.hpp"

namespace cfx {

using Rational = boost::multiprecision::cpp_rational;

struct EquivalenceResult {
    bool equivalent = true;
    /// A grid point where the models disagree.
    std::optional<Point> witness;
    std::size_t cells = 0;
};

/// Exact check over the common refinement of both models' leaf partitions.
/// Throws ContractError on schema mismatch and CapacityError past `cell_cap`.
EquivalenceResult functional_equivalence(const Model& f, const Model& g, std::size_t cell_cap = 50'000'000);

struct FidelityReport {
    double fidelity = 0.0;
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
    std::string kind;
};

/// Agreement rate on `n_samples` uniform grid points.
FidelityReport fidelity(const Model& f, const Model& g, std::size_t n_samples = 3000, std::uint64_t seed = 0);
/// Agreement rate on a fixed evaluation set.
FidelityReport fidelity(const Model& f, const Model& g, const std::vector<Point>& points);

std::vector<Point> uniform_points(const FeatureSchema& schema, std::size_t count, std::uint64_t seed);

struct CurvePoint {
    std::size_t queries = 0;
    double value = 0.0;
};
using Curve = std::vector<CurvePoint>;

/// Per-snapshot agreement of a run's partial models with `target` on `points`.
Curve snapshot_fidelity(const std::vector<Snapshot>& snapshots, const Model& target, const std::vector<Point>& points);

/// Per-snapshot certified fraction.
Curve certified_curve(const std::vector<Snapshot>& snapshots);

/// Mean over runs at checkpoints 0, step, 2 step, ... up to the longest run.
/// Each run contributes its latest value at or before the checkpoint, so a
/// finished run carries its final value forward.
Curve anytime_fidelity(const std::vector<Curve>& runs, std::size_t step = 20);

/// Value of a step curve at `queries` (latest point at or before it).
double curve_at(const Curve& curve, std::size_t queries);

struct BoundReport {
    int n = 0;
    int m = 0;
    std::vector<int> s;
    GridVolume product_bound;
    Rational balanced_bound;
    GridVolume worst_case_queries;
    GridVolume opt_queries_lower;
    Rational c_tra;
};

BoundReport bound_report(const std::vector<int>& s);
/// Uses per-axis split-level counts from stats().
BoundReport bound_report(const Model& model);

/// prod(s_i + 1) <= (1 + n/m)^m, exactly.
bool am_gm_holds(const std::vector<int>& s);

/// queries / (n + 1). Throws ContractError unless the run was certified.
Rational measured_ratio(std::size_t queries, bool certified, const Model& target);

std::string to_string(const Rational& r);

} // namespace cfx

#endif

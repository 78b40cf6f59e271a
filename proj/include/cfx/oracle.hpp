#ifndef CFX_ORACLE_HPP
#define CFX_ORACLE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cfx/distance.hpp"
#include "cfx/model.hpp"
#include "cfx/schema.hpp"

namespace cfx {

enum class OracleMode { kExact, kHeuristic };

const char* to_string(OracleMode mode);
OracleMode oracle_mode_from_string(const std::string& s);

struct OracleConfig {
    Norm norm = Norm::kL2;
    OracleMode mode = OracleMode::kExact;
    /// Heuristic mode: uniform samples drawn per query after the data scan.
    std::size_t samples = 1000;
    /// Heuristic mode: points scanned for a label flip before sampling.
    std::vector<Point> training_data;
    /// Exact mode on forests: cap on enumerated cells per query.
    std::size_t cell_cap = 1'000'000;
    std::uint64_t seed = 0;
    /// Keep a record per call (needed for trace output).
    bool keep_records = false;
    /// Heuristic mode: after each failed search, check with the exact
    /// search whether a counterfactual existed. Unbilled, diagnostic only.
    bool track_false_absence = false;
};

struct OracleResponse {
    Label label = 0;
    std::optional<Point> counterfactual;
    /// 1-based position of this call in the meter.
    std::size_t query_index = 0;
};

struct QueryRecord {
    Point x;
    Region region;
    OracleResponse response;
};

class QueryMeter {
public:
    explicit QueryMeter(bool keep_records = false) : keep_(keep_records) {}

    std::size_t count() const { return count_; }
    const std::vector<QueryRecord>& records() const { return records_; }

    /// Bills one call and returns its 1-based index.
    std::size_t bill(const Point& x, const Region& region, const OracleResponse& response);

private:
    bool keep_;
    std::size_t count_ = 0;
    std::vector<QueryRecord> records_;
};

/// Metered prediction + counterfactual API. Every call to query() bills
/// exactly one query; internal model evaluations are free.
class CounterfactualOracle {
public:
    CounterfactualOracle(Model target, Norm norm, bool keep_records);
    virtual ~CounterfactualOracle() = default;

    /// Label of `x` and, if found, a counterfactual inside `region`.
    /// Throws ContractError when `x` is not in `region`.
    OracleResponse query(const Point& x, const Region& region);

    const FeatureSchema& schema() const { return target_.schema(); }
    int num_classes() const { return target_.num_classes(); }
    const DistanceMetric& metric() const { return metric_; }
    const QueryMeter& meter() const { return meter_; }

protected:
    virtual std::optional<Point> find_counterfactual(const Point& x, const Region& region, Label label) = 0;

    const Model& target() const { return target_; }

private:
    Model target_;
    DistanceMetric metric_;
    QueryMeter meter_;
};

/// Globally optimal counterfactuals: minimum distance, ties broken by the
/// lexicographically smallest point.
class ExactOracle : public CounterfactualOracle {
public:
    ExactOracle(Model target, const OracleConfig& config = {});

protected:
    std::optional<Point> find_counterfactual(const Point& x, const Region& region, Label label) override;

private:
    std::size_t cell_cap_;
};

/// Training-data scan, then uniform sampling, then line search.
class HeuristicOracle : public CounterfactualOracle {
public:
    HeuristicOracle(Model target, const OracleConfig& config = {});

    /// Searches that returned nothing although a counterfactual existed
    /// (only counted with track_false_absence).
    std::size_t false_absences() const { return false_absences_; }

protected:
    std::optional<Point> find_counterfactual(const Point& x, const Region& region, Label label) override;

private:
    std::vector<Point> data_;
    std::size_t samples_;
    std::size_t cell_cap_;
    bool track_;
    std::size_t false_absences_ = 0;
    Rng rng_;
};

std::unique_ptr<CounterfactualOracle> make_oracle(Model target, const OracleConfig& config);

std::optional<Point> exact_tree_cf(const TreeModel& target, const Point& x, const Region& region,
                                   const DistanceMetric& d);

/// Throws CapacityError when the region splits into more than `cell_cap`
/// cells of constant forest output.
std::optional<Point> exact_ensemble_cf(const ForestModel& target, const Point& x, const Region& region,
                                       const DistanceMetric& d, std::size_t cell_cap = 1'000'000);

std::optional<Point> exact_cf(const Model& target, const Point& x, const Region& region, const DistanceMetric& d,
                              std::size_t cell_cap = 1'000'000);

std::optional<Point> heuristic_cf(const Model& target, const Point& x, const Region& region,
                                  const std::vector<Point>& training_data, std::size_t samples, Rng& rng);

/// Moves each coordinate of `x_cand` toward `x` while the label stays
/// different from label(x), repeating passes until no single step toward
/// `x` keeps the flip. Throws ContractError unless label(x_cand) != label(x).
Point line_search(const Model& target, const Point& x, const Point& x_cand);

/// True iff no single-coordinate one-step move of `x_cf` (any other
/// category for one-hot groups) stays in the domain, keeps a label
/// different from label(x), and gets strictly closer to `x`.
bool verify_local_optimality(const Model& target, const Point& x, const Point& x_cf, const DistanceMetric& d);

} // namespace cfx

#endif

#ifndef CFX_TRA_HPP
#define CFX_TRA_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cfx/model.hpp"
#include "cfx/oracle.hpp"
#include "cfx/schema.hpp"

namespace cfx {

enum class QueueOrder { kFifo, kLifo, kRandom };

const char* to_string(QueueOrder order);
QueueOrder queue_order_from_string(const std::string& s);

/// Partial model after `queries` billed calls. Unexplored regions carry
/// provisional labels (kUnknownLabel where no label can be inferred).
struct Snapshot {
    std::size_t queries = 0;
    Model model;
    GridVolume certified_volume;
    double certified_fraction = 0.0;
};

/// One iteration of the extraction loop, reported to the observer.
struct TraStep {
    const Region& region;
    const Point& x;
    const OracleResponse& response;
    /// Present when the response carried a counterfactual.
    const SplitResult* split;
    const GridVolume& certified_volume;
};

struct TraConfig {
    QueueOrder order = QueueOrder::kFifo;
    std::uint64_t seed = 0;
    /// Snapshot every this many queries (0: initial and final only).
    std::size_t snapshot_every = 20;
    std::size_t max_queue = 10'000'000;
    /// Stop after this many queries; the result is then not complete.
    std::optional<std::size_t> max_queries;
    /// Early-stop hook, consulted after each snapshot.
    std::function<bool(const Snapshot&)> stop;
    std::function<void(const TraStep&)> observer;
};

struct TraResult {
    TreeModel model;
    std::vector<Snapshot> snapshots;
    std::size_t queries = 0;
    GridVolume certified_volume;
    /// Queue ran empty: every region was finalized by a query.
    bool complete = false;

    double certified_fraction() const { return snapshots.empty() ? 0.0 : snapshots.back().certified_fraction; }
};

/// Tree reconstruction: query the center of each open region, split it
/// along the returned counterfactual, finalize it when none is returned.
/// With an exact oracle the result is functionally equivalent to the target.
TraResult tra_extract(CounterfactualOracle& oracle, const TraConfig& config = {});

double volume_fraction(const GridVolume& part, const GridVolume& whole);

} // namespace cfx

#endif

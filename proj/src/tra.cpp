#include "cfx/tra.hpp"

#include <deque>

#include <boost/multiprecision/cpp_int.hpp>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

struct OpenRegion {
    Region region;
    int node;
};

} // namespace

const char* to_string(QueueOrder order) {
    switch (order) {
    case QueueOrder::kFifo: return "fifo";
    case QueueOrder::kLifo: return "lifo";
    case QueueOrder::kRandom: return "random";
    }
    return "?";
}

QueueOrder queue_order_from_string(const std::string& s) {
    if (s == "fifo" || s == "bfs") return QueueOrder::kFifo;
    if (s == "lifo" || s == "dfs") return QueueOrder::kLifo;
    if (s == "random") return QueueOrder::kRandom;
    throw ContractError("unknown queue order '" + s + "'");
}

double volume_fraction(const GridVolume& part, const GridVolume& whole) {
    using boost::multiprecision::cpp_rational;
    return static_cast<double>(cpp_rational(part, whole));
}

TraResult tra_extract(CounterfactualOracle& oracle, const TraConfig& config) {
    const auto& schema = oracle.schema();
    auto schema_ptr = std::make_shared<const FeatureSchema>(schema);
    const GridVolume total = schema.total_volume();
    const bool binary = oracle.num_classes() == 2;

    TraResult res;
    res.model = TreeModel(schema_ptr, oracle.num_classes());
    res.model.set_root(res.model.add_leaf(kUnknownLabel));
    res.certified_volume = 0;

    std::deque<OpenRegion> queue;
    queue.push_back({schema.full_region(), res.model.root()});
    Rng rng(config.seed);
    const std::size_t start = oracle.meter().count();

    auto take_snapshot = [&]() {
        res.snapshots.push_back(
            {res.queries, Model(res.model), res.certified_volume, volume_fraction(res.certified_volume, total)});
        return config.stop && config.stop(res.snapshots.back());
    };
    bool stopped = take_snapshot();

    while (!queue.empty() && !stopped) {
        if (config.max_queries && res.queries >= *config.max_queries) break;
        OpenRegion cur;
        switch (config.order) {
        case QueueOrder::kFifo:
            cur = std::move(queue.front());
            queue.pop_front();
            break;
        case QueueOrder::kLifo:
            cur = std::move(queue.back());
            queue.pop_back();
            break;
        case QueueOrder::kRandom: {
            std::uniform_int_distribution<std::size_t> pick(0, queue.size() - 1);
            std::swap(queue[pick(rng)], queue.back());
            cur = std::move(queue.back());
            queue.pop_back();
            break;
        }
        }

        Point x = center(cur.region);
        OracleResponse r = oracle.query(x, cur.region);
        res.queries = oracle.meter().count() - start;

        if (!r.counterfactual) {
            res.model.node(cur.node).label = r.label;
            res.certified_volume += grid_volume(cur.region);
            if (config.observer) config.observer({cur.region, x, r, nullptr, res.certified_volume});
        } else {
            SplitResult sr = split(cur.region, x, *r.counterfactual);
            if (sr.steps.empty()) throw ContractError("oracle returned the query point as its own counterfactual");
            int slot = cur.node;
            for (std::size_t k = 0; k < sr.steps.size(); ++k) {
                const auto& step = sr.steps[k];
                int peel = res.model.add_leaf(r.label);
                int rest = res.model.add_leaf(kUnknownLabel);
                if (step.peel_is_left)
                    res.model.make_split(slot, step.test, peel, rest);
                else
                    res.model.make_split(slot, step.test, rest, peel);
                queue.push_back({sr.pieces[k], peel});
                slot = rest;
            }
            res.model.node(slot).label = binary ? 1 - r.label : kUnknownLabel;
            queue.push_back({sr.pieces.back(), slot});
            if (queue.size() > config.max_queue)
                throw CapacityError("extraction queue exceeded " + std::to_string(config.max_queue) +
                                    " open regions after " + std::to_string(res.queries) + " queries");
            if (config.observer) config.observer({cur.region, x, r, &sr, res.certified_volume});
        }

        if (config.snapshot_every > 0 && res.queries % config.snapshot_every == 0) stopped = take_snapshot();
    }

    res.complete = queue.empty();
    if (res.snapshots.back().queries != res.queries) take_snapshot();
    return res;
}

} // namespace cfx

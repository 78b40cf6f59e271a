#include "cfx/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <list>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

/// Pieces of `u` outside `b`; `b` must intersect `u`.
std::vector<Region> subtract(Region u, const Region& b) {
    std::vector<Region> out;
    for (std::size_t f = 0; f < u.size(); ++f) {
        if (u[f].categorical) {
            CategorySet rest = u[f].categories & ~b[f].categories;
            if (rest) {
                Region piece = u;
                piece[f].categories = rest;
                out.push_back(piece);
            }
            u[f].categories &= b[f].categories;
        } else {
            if (u[f].lo < b[f].lo) {
                Region piece = u;
                piece[f].hi = b[f].lo - 1;
                out.push_back(piece);
            }
            if (u[f].hi > b[f].hi) {
                Region piece = u;
                piece[f].lo = b[f].hi + 1;
                out.push_back(piece);
            }
            u[f].lo = std::max(u[f].lo, b[f].lo);
            u[f].hi = std::min(u[f].hi, b[f].hi);
        }
    }
    return out;
}

class SurrogateRun {
public:
    SurrogateRun(CounterfactualOracle& oracle, const AttackConfig& config)
        : oracle_(oracle), config_(config), schema_(std::make_shared<const FeatureSchema>(oracle.schema())),
          full_(schema_->full_region()), start_(oracle.meter().count()), rng_(config.seed) {
        if (config_.budget < 1) throw ContractError("attack budget must be >= 1");
        train_ = config.train;
        train_.num_classes = oracle.num_classes();
        res_.snapshots.push_back({0, Model(TreeModel::constant(schema_, 0, oracle.num_classes())), 0, 0.0});
    }

    std::size_t used() const { return oracle_.meter().count() - start_; }
    bool exhausted() const { return used() >= config_.budget; }
    Point sample() { return sample_uniform(full_, rng_); }

    OracleResponse ask(const Point& x) {
        OracleResponse r = oracle_.query(x, full_);
        res_.dataset.add(x, r.label);
        if (config_.snapshot_every > 0 && used() % config_.snapshot_every == 0) snapshot();
        return r;
    }

    /// Label of a counterfactual of a point labeled `label`: inferred in
    /// binary tasks, otherwise queried when budget remains.
    void add_flip(const Point& p, Label label) {
        if (oracle_.num_classes() == 2)
            res_.dataset.add(p, 1 - label);
        else if (!exhausted())
            ask(p);
    }

    AttackResult finish() {
        snapshot();
        res_.queries = used();
        res_.model = res_.snapshots.back().model;
        return std::move(res_);
    }

private:
    void snapshot() {
        Model m = fit();
        if (res_.snapshots.back().queries == used())
            res_.snapshots.back().model = m;
        else
            res_.snapshots.push_back({used(), m, 0, 0.0});
    }

    Model fit() const {
        if (config_.surrogate == SurrogateKind::kForest) return Model(train_forest(schema_, res_.dataset, train_));
        return Model(train_tree(schema_, res_.dataset, train_));
    }

    CounterfactualOracle& oracle_;
    const AttackConfig& config_;
    SchemaPtr schema_;
    Region full_;
    std::size_t start_;
    Rng rng_;
    TrainConfig train_;
    AttackResult res_{Model(TreeModel()), {}, 0, {}, false};
};

} // namespace

LeafIdOracle::LeafIdOracle(const Model& target) {
    if (!target.is_tree()) throw ContractError("the leaf-id oracle supports single trees only");
    target_ = target.tree();
}

LeafIdResponse LeafIdOracle::query(const Point& x) {
    schema().check_point(x);
    ++count_;
    int leaf = target_.leaf_index(x);
    return {leaf, target_.node(leaf).label};
}

PathFindingResult pathfinding_extract(LeafIdOracle& oracle, double epsilon) {
    const auto& schema = oracle.schema();
    auto schema_ptr = std::make_shared<const FeatureSchema>(schema);
    const std::size_t start = oracle.count();
    std::vector<GridIndex> step(schema.size(), 1);
    for (std::size_t f = 0; f < schema.size(); ++f)
        if (schema[f].kind == FeatureKind::kNumeric)
            step[f] = std::max<GridIndex>(1, static_cast<GridIndex>(std::floor(epsilon / schema[f].delta + 1e-9)));

    std::list<Region> uncovered{schema.full_region()};
    std::vector<LabeledBox> boxes;
    std::size_t seeds = 0;
    while (!uncovered.empty()) {
        ++seeds;
        Point x = center(uncovered.front());
        LeafIdResponse seed = oracle.query(x);
        auto same = [&](const Point& p) { return oracle.query(p).leaf == seed.leaf; };

        Region box = schema.full_region();
        for (std::size_t f = 0; f < schema.size(); ++f) {
            Point p = x;
            if (schema[f].is_categorical()) {
                CategorySet cats = CategorySet{1} << x[f];
                for (int c = 0; c < schema[f].category_count(); ++c) {
                    if (c == x[f]) continue;
                    p[f] = c;
                    if (same(p)) cats |= CategorySet{1} << c;
                }
                box[f].categories = cats;
                continue;
            }
            // Lower edge: a is outside the leaf, b inside.
            GridIndex lo = 0;
            if (x[f] > 0) {
                p[f] = 0;
                if (!same(p)) {
                    GridIndex a = 0, b = x[f];
                    while (b - a > step[f]) {
                        p[f] = a + (b - a) / 2;
                        (same(p) ? b : a) = p[f];
                    }
                    lo = b;
                }
            }
            GridIndex hi = schema[f].max_index();
            if (x[f] < hi) {
                p[f] = hi;
                if (!same(p)) {
                    GridIndex a = hi, b = x[f];
                    while (a - b > step[f]) {
                        p[f] = b + (a - b) / 2;
                        (same(p) ? b : a) = p[f];
                    }
                    hi = b;
                }
            }
            box[f] = FeatureRange::interval(lo, hi);
        }

        for (auto it = uncovered.begin(); it != uncovered.end();) {
            Region overlap = it->intersect(box);
            if (overlap.empty()) {
                ++it;
                continue;
            }
            boxes.push_back({overlap, seed.label});
            for (auto& piece : subtract(*it, box)) uncovered.push_back(std::move(piece));
            it = uncovered.erase(it);
        }
    }
    PathFindingResult res{boxes_to_tree(schema_ptr, boxes, oracle.num_classes()), oracle.count() - start, seeds};
    return res;
}

std::size_t default_budget(const Model& target) {
    std::size_t nodes = 0;
    for (const auto* t : target.trees()) nodes += t->nodes().size();
    return 50 * nodes;
}

AttackResult cf_attack(CounterfactualOracle& oracle, const AttackConfig& config) {
    SurrogateRun run(oracle, config);
    while (!run.exhausted()) {
        OracleResponse r = run.ask(run.sample());
        if (r.counterfactual) run.add_flip(*r.counterfactual, r.label);
    }
    return run.finish();
}

AttackResult dualcf_attack(CounterfactualOracle& oracle, const AttackConfig& config) {
    SurrogateRun run(oracle, config);
    while (!run.exhausted()) {
        OracleResponse r = run.ask(run.sample());
        if (!r.counterfactual || run.exhausted()) continue;
        OracleResponse rc = run.ask(*r.counterfactual);
        if (rc.counterfactual) run.add_flip(*rc.counterfactual, rc.label);
    }
    return run.finish();
}

} // namespace cfx

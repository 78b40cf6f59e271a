#include "cfx/oracle.hpp"

#include "cfx/errors.hpp"

namespace cfx {

namespace {

struct Best {
    std::optional<Point> point;
    Distance dist;

    void offer(Point p, Distance d) {
        if (!point || d < dist || (d == dist && p < *point)) {
            point = std::move(p);
            dist = d;
        }
    }
};

} // namespace

const char* to_string(OracleMode mode) { return mode == OracleMode::kExact ? "exact" : "heuristic"; }

OracleMode oracle_mode_from_string(const std::string& s) {
    if (s == "exact") return OracleMode::kExact;
    if (s == "heuristic") return OracleMode::kHeuristic;
    throw ContractError("unknown oracle mode '" + s + "'");
}

std::size_t QueryMeter::bill(const Point& x, const Region& region, const OracleResponse& response) {
    ++count_;
    if (keep_) {
        records_.push_back({x, region, response});
        records_.back().response.query_index = count_;
    }
    return count_;
}

CounterfactualOracle::CounterfactualOracle(Model target, Norm norm, bool keep_records)
    : target_(std::move(target)), metric_(target_.schema(), norm), meter_(keep_records) {}

OracleResponse CounterfactualOracle::query(const Point& x, const Region& region) {
    schema().check_point(x);
    schema().check_region(region);
    if (!region.contains(x)) throw ContractError("query point lies outside the requested region");
    OracleResponse r;
    r.label = target_.predict(x);
    r.counterfactual = find_counterfactual(x, region, r.label);
    r.query_index = meter_.bill(x, region, r);
    return r;
}

ExactOracle::ExactOracle(Model target, const OracleConfig& config)
    : CounterfactualOracle(std::move(target), config.norm, config.keep_records), cell_cap_(config.cell_cap) {
    if (cell_cap_ < 1) throw ContractError("cell_cap must be >= 1");
}

std::optional<Point> ExactOracle::find_counterfactual(const Point& x, const Region& region, Label) {
    return exact_cf(target(), x, region, metric(), cell_cap_);
}

HeuristicOracle::HeuristicOracle(Model target, const OracleConfig& config)
    : CounterfactualOracle(std::move(target), config.norm, config.keep_records),
      data_(config.training_data),
      samples_(config.samples),
      cell_cap_(config.cell_cap),
      track_(config.track_false_absence),
      rng_(config.seed) {
    if (samples_ < 1) throw ContractError("heuristic sample count must be >= 1");
    for (const auto& p : data_) schema().check_point(p);
}

std::optional<Point> HeuristicOracle::find_counterfactual(const Point& x, const Region& region, Label) {
    auto cf = heuristic_cf(target(), x, region, data_, samples_, rng_);
    if (!cf && track_ && exact_cf(target(), x, region, metric(), cell_cap_)) ++false_absences_;
    return cf;
}

std::unique_ptr<CounterfactualOracle> make_oracle(Model target, const OracleConfig& config) {
    if (config.mode == OracleMode::kExact) return std::make_unique<ExactOracle>(std::move(target), config);
    return std::make_unique<HeuristicOracle>(std::move(target), config);
}

std::optional<Point> exact_tree_cf(const TreeModel& target, const Point& x, const Region& region,
                                   const DistanceMetric& d) {
    if (!region.contains(x)) throw ContractError("query point lies outside the requested region");
    Label label = target.predict(x);
    Best best;
    for (const auto& leaf : leaf_regions(target, region)) {
        if (leaf.label == label) continue;
        Point p = d.project(x, leaf.region);
        best.offer(p, d(x, p));
    }
    return best.point;
}

std::optional<Point> exact_ensemble_cf(const ForestModel& target, const Point& x, const Region& region,
                                       const DistanceMetric& d, std::size_t cell_cap) {
    if (!region.contains(x)) throw ContractError("query point lies outside the requested region");
    Label label = target.predict(x);
    std::vector<const TreeModel*> trees;
    for (const auto& t : target.trees()) trees.push_back(&t);
    Best best;
    try {
        for_each_cell(trees, region, cell_cap, [&](const Region& cell, std::span<const Label> labels) {
            if (target.vote(labels) == label) return;
            Point p = d.project(x, cell);
            best.offer(p, d(x, p));
        });
    } catch (const CapacityError& e) {
        throw CapacityError(std::string(e.what()) + "; exact ensemble search is too large, use the heuristic oracle");
    }
    return best.point;
}

std::optional<Point> exact_cf(const Model& target, const Point& x, const Region& region, const DistanceMetric& d,
                              std::size_t cell_cap) {
    if (target.is_tree()) return exact_tree_cf(target.tree(), x, region, d);
    return exact_ensemble_cf(target.forest(), x, region, d, cell_cap);
}

std::optional<Point> heuristic_cf(const Model& target, const Point& x, const Region& region,
                                  const std::vector<Point>& training_data, std::size_t samples, Rng& rng) {
    if (!region.contains(x)) throw ContractError("query point lies outside the requested region");
    Label label = target.predict(x);
    for (const auto& p : training_data)
        if (region.contains(p) && target.predict(p) != label) return line_search(target, x, p);
    for (std::size_t i = 0; i < samples; ++i) {
        Point p = sample_uniform(region, rng);
        if (target.predict(p) != label) return line_search(target, x, p);
    }
    return std::nullopt;
}

Point line_search(const Model& target, const Point& x, const Point& x_cand) {
    const auto& schema = target.schema();
    Label label = target.predict(x);
    if (target.predict(x_cand) == label) throw ContractError("line search needs a label-flipping candidate");
    Point cur = x_cand;
    auto flipped = [&](const Point& p) { return target.predict(p) != label; };
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < schema.size(); ++i) {
            if (cur[i] == x[i]) continue;
            Point probe = cur;
            probe[i] = x[i];
            if (flipped(probe)) {
                cur = probe;
                changed = true;
                continue;
            }
            if (schema[i].is_categorical()) continue;
            // Invariant: coordinate a keeps x's label, b keeps the flip.
            GridIndex a = x[i];
            GridIndex b = cur[i];
            while (b - a > 1 || a - b > 1) {
                probe[i] = a + (b - a) / 2;
                if (flipped(probe))
                    b = probe[i];
                else
                    a = probe[i];
            }
            if (b != cur[i]) {
                cur[i] = b;
                changed = true;
            }
        }
    }
    return cur;
}

bool verify_local_optimality(const Model& target, const Point& x, const Point& x_cf, const DistanceMetric& d) {
    const auto& schema = target.schema();
    Label label = target.predict(x);
    Distance base = d(x, x_cf);
    auto violates = [&](const Point& p) { return target.predict(p) != label && d(x, p) < base; };
    for (std::size_t i = 0; i < schema.size(); ++i) {
        Point p = x_cf;
        if (schema[i].is_categorical()) {
            for (int c = 0; c < schema[i].category_count(); ++c) {
                if (c == x_cf[i]) continue;
                p[i] = c;
                if (violates(p)) return false;
            }
            continue;
        }
        for (GridIndex step : {GridIndex{-1}, GridIndex{1}}) {
            p[i] = x_cf[i] + step;
            if (p[i] < 0 || p[i] > schema[i].max_index()) continue;
            if (violates(p)) return false;
        }
    }
    return true;
}

} // namespace cfx

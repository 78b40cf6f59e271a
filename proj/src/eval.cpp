#include "cfx/eval.hpp"

#include <algorithm>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

struct Disagreement {
    Point witness;
};

} // namespace

EquivalenceResult functional_equivalence(const Model& f, const Model& g, std::size_t cell_cap) {
    if (!(f.schema() == g.schema())) throw ContractError("models are defined over different schemas");
    auto tf = f.trees();
    auto tg = g.trees();
    std::vector<const TreeModel*> all(tf);
    all.insert(all.end(), tg.begin(), tg.end());
    EquivalenceResult res;
    try {
        res.cells = for_each_cell(all, f.schema().full_region(), cell_cap,
                                  [&](const Region& cell, std::span<const Label> labels) {
                                      Label a = f.combine(labels.first(tf.size()));
                                      Label b = g.combine(labels.subspan(tf.size()));
                                      if (a != b || a == kUnknownLabel) throw Disagreement{cell.lower_corner()};
                                  });
    } catch (const Disagreement& d) {
        res.equivalent = false;
        res.witness = d.witness;
    } catch (const CapacityError& e) {
        throw CapacityError(std::string(e.what()) + "; use sampled fidelity instead");
    }
    return res;
}

std::vector<Point> uniform_points(const FeatureSchema& schema, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    Region full = schema.full_region();
    std::vector<Point> pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pts.push_back(sample_uniform(full, rng));
    return pts;
}

FidelityReport fidelity(const Model& f, const Model& g, const std::vector<Point>& points) {
    if (!(f.schema() == g.schema())) throw ContractError("models are defined over different schemas");
    std::size_t agree = 0;
    for (const auto& p : points) {
        Label a = f.predict(p);
        if (a != kUnknownLabel && a == g.predict(p)) ++agree;
    }
    FidelityReport r;
    r.sample_count = points.size();
    r.fidelity = points.empty() ? 1.0 : static_cast<double>(agree) / static_cast<double>(points.size());
    r.kind = "points";
    return r;
}

FidelityReport fidelity(const Model& f, const Model& g, std::size_t n_samples, std::uint64_t seed) {
    FidelityReport r = fidelity(f, g, uniform_points(f.schema(), n_samples, seed));
    r.seed = seed;
    r.kind = "uniform";
    return r;
}

Curve snapshot_fidelity(const std::vector<Snapshot>& snapshots, const Model& target, const std::vector<Point>& points) {
    Curve c;
    for (const auto& s : snapshots) c.push_back({s.queries, fidelity(s.model, target, points).fidelity});
    return c;
}

Curve certified_curve(const std::vector<Snapshot>& snapshots) {
    Curve c;
    for (const auto& s : snapshots) c.push_back({s.queries, s.certified_fraction});
    return c;
}

double curve_at(const Curve& curve, std::size_t queries) {
    double v = 0.0;
    for (const auto& p : curve) {
        if (p.queries > queries) break;
        v = p.value;
    }
    return v;
}

Curve anytime_fidelity(const std::vector<Curve>& runs, std::size_t step) {
    if (runs.empty()) throw ContractError("anytime fidelity needs at least one run");
    if (step == 0) throw ContractError("checkpoint step must be positive");
    std::size_t last = 0;
    for (const auto& r : runs) {
        if (r.empty()) throw ContractError("run without snapshots");
        if (!std::is_sorted(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.queries < b.queries; }))
            throw ContractError("run snapshots are not ordered by query count");
        last = std::max(last, r.back().queries);
    }
    Curve out;
    for (std::size_t q = 0;; q += step) {
        std::size_t at = std::min(q, last);
        double sum = 0.0;
        for (const auto& r : runs) sum += curve_at(r, at);
        out.push_back({at, sum / static_cast<double>(runs.size())});
        if (at == last) break;
    }
    return out;
}

BoundReport bound_report(const std::vector<int>& s) {
    if (s.empty()) throw ContractError("bound report needs at least one axis");
    BoundReport b;
    b.s = s;
    b.m = static_cast<int>(s.size());
    b.product_bound = 1;
    for (int v : s) {
        if (v < 0) throw ContractError("split counts must be >= 0");
        b.n += v;
        b.product_bound *= v + 1;
    }
    Rational base = Rational(1) + Rational(b.n, b.m);
    b.balanced_bound = 1;
    for (int i = 0; i < b.m; ++i) b.balanced_bound *= base;
    b.worst_case_queries = 2 * b.product_bound - 1;
    b.opt_queries_lower = b.n + 1;
    b.c_tra = Rational(b.worst_case_queries, b.opt_queries_lower);
    return b;
}

BoundReport bound_report(const Model& model) { return bound_report(stats(model).s); }

bool am_gm_holds(const std::vector<int>& s) {
    BoundReport b = bound_report(s);
    return Rational(b.product_bound) <= b.balanced_bound;
}

Rational measured_ratio(std::size_t queries, bool certified, const Model& target) {
    if (!certified) throw ContractError("competitive ratio needs an equivalence-certified run");
    return Rational(static_cast<long long>(queries), stats(target).n + 1);
}

std::string to_string(const Rational& r) {
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

} // namespace cfx

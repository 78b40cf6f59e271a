// Shared fixtures and brute-force reference implementations for tests.
#ifndef CFX_TESTS_SUPPORT_HPP
#define CFX_TESTS_SUPPORT_HPP

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "cfx/distance.hpp"
#include "cfx/model.hpp"
#include "cfx/schema.hpp"

namespace cfx {

inline void PrintTo(const Point& p, std::ostream* os) {
    *os << '(';
    for (std::size_t i = 0; i < p.size(); ++i) *os << (i ? ", " : "") << p[i];
    *os << ')';
}

} // namespace cfx

namespace cfx::test {

inline constexpr double kFine = 1.0 / 1024;

inline SchemaPtr make_schema(std::vector<FeatureSpec> f) {
    return std::make_shared<const FeatureSchema>(FeatureSchema(std::move(f)));
}

inline SchemaPtr unit_square(double delta = kFine) {
    return make_schema({FeatureSpec::numeric("x1", 0, 1, delta), FeatureSpec::numeric("x2", 0, 1, delta)});
}

/// The mixed-type schemas used by the property suites (2, 4, 6 and 8 axes).
inline std::vector<SchemaPtr> mixed_schemas() {
    using F = FeatureSpec;
    return {
        make_schema({F::numeric("a", 0, 1, kFine), F::numeric("b", 0, 1, kFine)}),
        make_schema({F::numeric("a", 0, 1, kFine), F::binary("b"), F::ordinal("c", 5), F::numeric("d", 0, 1, kFine)}),
        make_schema({F::numeric("a", 0, 1, kFine), F::ordinal("b", 8), F::binary("c"), F::categorical("d", 3)}),
        make_schema({F::numeric("a", 0, 1, kFine), F::numeric("b", 0, 1, kFine), F::binary("c"), F::ordinal("d", 10),
                     F::categorical("e", 4)}),
    };
}

/// Small grids (at most 3 axes) for exhaustive checks.
inline std::vector<SchemaPtr> small_schemas() {
    using F = FeatureSpec;
    return {
        make_schema({F::numeric("a", 0, 1, 1.0 / 40), F::numeric("b", 0, 1, 1.0 / 40)}),
        make_schema({F::numeric("a", 0, 1, 1.0 / 16), F::ordinal("b", 7), F::binary("c")}),
        make_schema({F::ordinal("a", 20), F::categorical("b", 2)}),
        make_schema({F::numeric("a", 0, 2, 1.0 / 10), F::ordinal("b", 12)}),
    };
}

inline void for_each_point(const Region& region, const std::function<void(const Point&)>& visit) {
    if (region.empty()) return;
    Point p = region.lower_corner();
    const std::size_t n = region.size();
    while (true) {
        visit(p);
        std::size_t i = 0;
        for (; i < n; ++i) {
            const auto& r = region[i];
            if (r.categorical) {
                GridIndex c = p[i] + 1;
                while (c < 64 && !r.contains(c)) ++c;
                if (c < 64) {
                    p[i] = c;
                    break;
                }
                p[i] = lowest_category(r.categories);
            } else {
                if (p[i] < r.hi) {
                    ++p[i];
                    break;
                }
                p[i] = r.lo;
            }
        }
        if (i == n) return;
    }
}

/// Closest label-flipping grid point by exhaustive scan (ties: smallest point).
inline std::optional<Point> brute_force_cf(const Model& m, const Point& x, const Region& region,
                                           const DistanceMetric& d) {
    Label y = m.predict(x);
    std::optional<Point> best;
    Distance best_d;
    for_each_point(region, [&](const Point& p) {
        if (m.predict(p) == y) return;
        Distance dp = d(x, p);
        if (!best || dp < best_d || (dp == best_d && p < *best)) {
            best = p;
            best_d = dp;
        }
    });
    return best;
}

/// First grid point where the models disagree, by exhaustive scan.
inline std::optional<Point> brute_force_disagreement(const Model& f, const Model& g) {
    std::optional<Point> out;
    for_each_point(f.schema().full_region(), [&](const Point& p) {
        if (!out && f.predict(p) != g.predict(p)) out = p;
    });
    return out;
}

inline Region random_subregion(const Region& full, Rng& rng) {
    Region r = full;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i].categorical) {
            CategorySet s = 0;
            while (s == 0) s = std::uniform_int_distribution<CategorySet>(0, full[i].categories)(rng) & full[i].categories;
            r[i].categories = s;
        } else {
            GridIndex a = std::uniform_int_distribution<GridIndex>(full[i].lo, full[i].hi)(rng);
            GridIndex b = std::uniform_int_distribution<GridIndex>(full[i].lo, full[i].hi)(rng);
            r[i].lo = std::min(a, b);
            r[i].hi = std::max(a, b);
        }
    }
    return r;
}

/// Grid point of a real-valued coordinate vector (one value per feature).
inline Point at(const FeatureSchema& s, std::vector<double> v) {
    Point p;
    for (std::size_t i = 0; i < v.size(); ++i)
        p.coords.push_back(s[i].is_categorical() ? static_cast<GridIndex>(v[i]) : s[i].snap(v[i]));
    return p;
}

inline SplitTest le(std::size_t feature, GridIndex threshold) {
    SplitTest t;
    t.feature = feature;
    t.threshold = threshold;
    return t;
}

} // namespace cfx::test

#endif

#include "cfx/schema.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

CategorySet all_categories(int k) {
    return k >= kMaxCategories ? ~CategorySet{0} : ((CategorySet{1} << k) - 1);
}

CategorySet bit(GridIndex c) { return CategorySet{1} << c; }

} // namespace

const char* to_string(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::kNumeric: return "numeric";
    case FeatureKind::kOrdinal: return "ordinal";
    case FeatureKind::kBinary: return "binary";
    case FeatureKind::kCategorical: return "categorical";
    }
    return "?";
}

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "numeric") return FeatureKind::kNumeric;
    if (s == "ordinal") return FeatureKind::kOrdinal;
    if (s == "binary") return FeatureKind::kBinary;
    if (s == "categorical") return FeatureKind::kCategorical;
    throw ContractError("unknown feature kind '" + s + "'");
}

FeatureSpec FeatureSpec::numeric(std::string name, double lo, double hi, double delta) {
    FeatureSpec f;
    f.name = std::move(name);
    f.kind = FeatureKind::kNumeric;
    f.lo = lo;
    f.hi = hi;
    f.delta = delta;
    f.validate();
    return f;
}

FeatureSpec FeatureSpec::ordinal(std::string name, int levels) {
    FeatureSpec f;
    f.name = std::move(name);
    f.kind = FeatureKind::kOrdinal;
    f.levels = levels;
    f.lo = 0;
    f.hi = levels - 1;
    f.delta = 1;
    f.validate();
    return f;
}

FeatureSpec FeatureSpec::binary(std::string name) {
    FeatureSpec f;
    f.name = std::move(name);
    f.kind = FeatureKind::kBinary;
    f.lo = 0;
    f.hi = 1;
    f.delta = 1;
    return f;
}

FeatureSpec FeatureSpec::categorical(std::string name, int k) {
    std::vector<std::string> names;
    for (int c = 0; c < k; ++c) names.push_back(std::to_string(c));
    return categorical(std::move(name), std::move(names));
}

FeatureSpec FeatureSpec::categorical(std::string name, std::vector<std::string> names) {
    FeatureSpec f;
    f.name = std::move(name);
    f.kind = FeatureKind::kCategorical;
    f.categories = std::move(names);
    f.validate();
    return f;
}

GridIndex FeatureSpec::max_index() const {
    switch (kind) {
    case FeatureKind::kNumeric: return static_cast<GridIndex>(std::llround((hi - lo) / delta));
    case FeatureKind::kOrdinal: return levels - 1;
    case FeatureKind::kBinary: return 1;
    case FeatureKind::kCategorical: return category_count() - 1;
    }
    return 0;
}

double FeatureSpec::value_at(GridIndex index) const {
    switch (kind) {
    case FeatureKind::kNumeric:
        return index == max_index() ? hi : lo + static_cast<double>(index) * delta;
    default: return static_cast<double>(index);
    }
}

GridIndex FeatureSpec::snap(double value) const {
    double steps = kind == FeatureKind::kNumeric ? (value - lo) / delta : value;
    GridIndex i = static_cast<GridIndex>(std::llround(steps));
    if (!std::isfinite(steps) || std::abs(steps - static_cast<double>(i)) > 0.5 + 1e-9 ||
        i < 0 || i > max_index()) {
        std::ostringstream s;
        s << "value " << value << " outside the domain of feature '" << name << "'";
        throw ContractError(s.str());
    }
    return i;
}

void FeatureSpec::validate() const {
    auto fail = [&](const std::string& why) {
        throw ContractError("feature '" + name + "': " + why);
    };
    switch (kind) {
    case FeatureKind::kNumeric: {
        if (!(lo < hi)) fail("requires lo < hi");
        if (!(delta > 0)) fail("requires delta > 0");
        double steps = (hi - lo) / delta;
        if (std::abs(steps - std::round(steps)) > 1e-6 * std::max(1.0, steps))
            fail("(hi - lo) / delta must be an integer");
        if (std::round(steps) < 1) fail("grid must have at least two points");
        break;
    }
    case FeatureKind::kOrdinal:
        if (levels < 2) fail("ordinal features need at least 2 levels");
        break;
    case FeatureKind::kBinary: break;
    case FeatureKind::kCategorical:
        if (category_count() < 2) fail("categorical features need at least 2 categories");
        if (category_count() > kMaxCategories) fail("at most 64 categories supported");
        break;
    }
}

bool FeatureRange::contains(GridIndex v) const {
    if (categorical) return v >= 0 && v < kMaxCategories && (categories & bit(v)) != 0;
    return lo <= v && v <= hi;
}

GridIndex FeatureRange::cardinality() const {
    if (categorical) return std::popcount(categories);
    return lo > hi ? 0 : hi - lo + 1;
}

bool Region::empty() const {
    return std::any_of(ranges.begin(), ranges.end(), [](const FeatureRange& r) { return r.empty(); });
}

bool Region::contains(const Point& p) const {
    if (p.size() != ranges.size()) return false;
    for (std::size_t i = 0; i < ranges.size(); ++i)
        if (!ranges[i].contains(p[i])) return false;
    return true;
}

Region Region::intersect(const Region& other) const {
    if (other.size() != size()) throw ContractError("region dimension mismatch");
    Region out = *this;
    for (std::size_t i = 0; i < size(); ++i) {
        if (ranges[i].categorical != other[i].categorical)
            throw ContractError("region feature kind mismatch");
        if (ranges[i].categorical) {
            out[i].categories &= other[i].categories;
        } else {
            out[i].lo = std::max(ranges[i].lo, other[i].lo);
            out[i].hi = std::min(ranges[i].hi, other[i].hi);
        }
    }
    return out;
}

Point Region::lower_corner() const {
    Point p;
    p.coords.reserve(size());
    for (const auto& r : ranges) p.coords.push_back(r.categorical ? lowest_category(r.categories) : r.lo);
    return p;
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
    if (features_.empty()) throw ContractError("schema needs at least one feature");
    for (const auto& f : features_) {
        f.validate();
        axis_offset_.push_back(axis_count_);
        axis_count_ += f.axis_count();
    }
}

std::size_t FeatureSchema::feature_of_axis(int axis) const {
    if (axis < 0 || axis >= axis_count_) throw ContractError("axis out of range");
    auto it = std::upper_bound(axis_offset_.begin(), axis_offset_.end(), axis);
    return static_cast<std::size_t>(std::distance(axis_offset_.begin(), it) - 1);
}

Region FeatureSchema::full_region() const {
    Region r;
    for (const auto& f : features_) {
        if (f.is_categorical())
            r.ranges.push_back(FeatureRange::category_set(all_categories(f.category_count())));
        else
            r.ranges.push_back(FeatureRange::interval(0, f.max_index()));
    }
    return r;
}

bool FeatureSchema::contains(const Point& p) const { return full_region().contains(p); }

void FeatureSchema::check_point(const Point& p) const {
    if (p.size() != size())
        throw ContractError("point has " + std::to_string(p.size()) + " coordinates, schema has " +
                            std::to_string(size()) + " features");
    for (std::size_t i = 0; i < size(); ++i)
        if (p[i] < 0 || p[i] > features_[i].max_index())
            throw ContractError("point coordinate " + std::to_string(i) + " outside the domain");
}

void FeatureSchema::check_region(const Region& r) const {
    if (r.size() != size()) throw ContractError("region dimension mismatch");
    for (std::size_t i = 0; i < size(); ++i) {
        const auto& f = features_[i];
        if (r[i].categorical != f.is_categorical())
            throw ContractError("region feature kind mismatch at " + std::to_string(i));
        if (f.is_categorical()) {
            if ((r[i].categories & ~all_categories(f.category_count())) != 0)
                throw ContractError("region category outside the domain");
        } else if (r[i].lo < 0 || r[i].hi > f.max_index()) {
            throw ContractError("region interval outside the domain");
        }
    }
}

std::vector<double> FeatureSchema::axis_values(const Point& p) const {
    check_point(p);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(axis_count_));
    for (std::size_t i = 0; i < size(); ++i) {
        const auto& f = features_[i];
        if (f.is_categorical()) {
            for (int c = 0; c < f.category_count(); ++c) out.push_back(c == p[i] ? 1.0 : 0.0);
        } else {
            out.push_back(f.value_at(p[i]));
        }
    }
    return out;
}

Point FeatureSchema::from_axis_values(const std::vector<double>& values) const {
    if (values.size() != static_cast<std::size_t>(axis_count_))
        throw ContractError("expected " + std::to_string(axis_count_) + " axis values");
    Point p;
    for (std::size_t i = 0; i < size(); ++i) {
        const auto& f = features_[i];
        auto off = static_cast<std::size_t>(axis_offset_[i]);
        if (f.is_categorical()) {
            int active = -1;
            for (int c = 0; c < f.category_count(); ++c) {
                double v = values[off + static_cast<std::size_t>(c)];
                if (v == 1.0) {
                    if (active >= 0) throw ContractError("one-hot group '" + f.name + "' has two active axes");
                    active = c;
                } else if (v != 0.0) {
                    throw ContractError("one-hot axis value must be 0 or 1");
                }
            }
            if (active < 0) throw ContractError("one-hot group '" + f.name + "' has no active axis");
            p.coords.push_back(active);
        } else {
            p.coords.push_back(f.snap(values[off]));
        }
    }
    return p;
}

GridVolume FeatureSchema::total_volume() const { return grid_volume(full_region()); }

bool FeatureSchema::operator==(const FeatureSchema& other) const {
    if (size() != other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        const auto& a = features_[i];
        const auto& b = other.features_[i];
        if (a.kind != b.kind || a.max_index() != b.max_index()) return false;
        if (a.kind == FeatureKind::kNumeric && (a.lo != b.lo || a.delta != b.delta)) return false;
    }
    return true;
}

int lowest_category(CategorySet set) {
    if (set == 0) throw ContractError("empty category set");
    return std::countr_zero(set);
}

int category_count(CategorySet set) { return std::popcount(set); }

Point center(const Region& region) {
    if (region.empty()) throw ContractError("center of an empty region");
    Point p;
    p.coords.reserve(region.size());
    for (const auto& r : region.ranges)
        p.coords.push_back(r.categorical ? lowest_category(r.categories) : r.lo + (r.hi - r.lo) / 2);
    return p;
}

bool SplitTest::goes_left(const Point& p) const {
    GridIndex v = p[feature];
    return categorical ? (left_categories & bit(v)) != 0 : v <= threshold;
}

int SplitTest::axis(const FeatureSchema& schema) const {
    int base = schema.first_axis(feature);
    return categorical ? base + lowest_category(left_categories) : base;
}

SplitResult split(const Region& region, const Point& x, const Point& x_cf) {
    if (!region.contains(x)) throw ContractError("split: query point outside region");
    if (!region.contains(x_cf)) throw ContractError("split: counterfactual outside region");
    if (x == x_cf) throw ContractError("split: counterfactual equals the query point");

    SplitResult out;
    Region rest = region;
    auto peel = [&](Region piece, Region remainder, SplitStep step) {
        if (piece.empty()) return;
        out.pieces.push_back(std::move(piece));
        out.steps.push_back(step);
        rest = std::move(remainder);
    };

    for (std::size_t i = 0; i < region.size(); ++i) {
        GridIndex xi = x[i];
        GridIndex v = x_cf[i];
        if (xi == v) continue;
        if (region[i].categorical) {
            // One-hot axes of the group that flip: the query's category (1 -> 0)
            // and the counterfactual's (0 -> 1), visited in axis order.
            for (GridIndex c : {std::min(xi, v), std::max(xi, v)}) {
                Region piece = rest;
                Region remainder = rest;
                SplitStep step;
                step.test.feature = i;
                step.test.categorical = true;
                step.test.left_categories = bit(c);
                if (c == xi) {
                    piece[i].categories &= bit(c);
                    remainder[i].categories &= ~bit(c);
                    step.peel_is_left = true;
                } else {
                    piece[i].categories &= ~bit(c);
                    remainder[i].categories &= bit(c);
                    step.peel_is_left = false;
                }
                peel(std::move(piece), std::move(remainder), step);
            }
        } else {
            Region piece = rest;
            Region remainder = rest;
            SplitStep step;
            step.test.feature = i;
            if (v < xi) {
                piece[i].lo = v + 1;
                remainder[i].hi = v;
                step.test.threshold = v;
                step.peel_is_left = false;
            } else {
                piece[i].hi = v - 1;
                remainder[i].lo = v;
                step.test.threshold = v - 1;
                step.peel_is_left = true;
            }
            peel(std::move(piece), std::move(remainder), step);
        }
    }
    out.pieces.push_back(std::move(rest));
    return out;
}

GridVolume grid_volume(const Region& region) {
    GridVolume v = 1;
    for (const auto& r : region.ranges) {
        GridIndex c = r.cardinality();
        if (c <= 0) return 0;
        v *= c;
    }
    return v;
}

GridVolume grid_volume(const Region& region, const FeatureSchema& schema) {
    schema.check_region(region);
    return grid_volume(region);
}

Point sample_uniform(const Region& region, Rng& rng) {
    if (region.empty()) throw ContractError("sampling from an empty region");
    Point p;
    p.coords.reserve(region.size());
    for (const auto& r : region.ranges) {
        if (r.categorical) {
            int n = category_count(r.categories);
            int pick = std::uniform_int_distribution<int>(0, n - 1)(rng);
            CategorySet s = r.categories;
            for (int k = 0; k < pick; ++k) s &= s - 1;
            p.coords.push_back(lowest_category(s));
        } else {
            p.coords.push_back(std::uniform_int_distribution<GridIndex>(r.lo, r.hi)(rng));
        }
    }
    return p;
}

} // namespace cfx

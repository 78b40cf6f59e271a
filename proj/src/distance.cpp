#include "cfx/distance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfx/errors.hpp"

namespace cfx {

const char* to_string(Norm norm) { return norm == Norm::kL1 ? "l1" : "l2"; }

Norm norm_from_string(const std::string& s) {
    if (s == "l1" || s == "L1") return Norm::kL1;
    if (s == "l2" || s == "L2") return Norm::kL2;
    throw ContractError("unknown norm '" + s + "'");
}

DistanceMetric::DistanceMetric(const FeatureSchema& schema, Norm norm) : norm_(norm) {
    constexpr std::int64_t kMaxScale = std::int64_t{1} << 40;
    std::int64_t scale = 1;
    for (const auto& f : schema.features()) {
        if (f.is_categorical()) continue;
        std::int64_t k = f.max_index();
        std::int64_t g = std::gcd(scale, k);
        if (scale / g > kMaxScale / k) throw CapacityError("distance scale overflow: grid step counts too incoherent");
        scale = scale / g * k;
    }
    for (const auto& f : schema.features()) {
        categorical_.push_back(f.is_categorical());
        weight_.push_back(f.is_categorical() ? 0 : scale / f.max_index());
    }
    __int128 s = scale;
    category_term_ = norm_ == Norm::kL1 ? 2 * s : 2 * s * s;
    unit_ = static_cast<double>(scale);
}

__int128 DistanceMetric::term(std::size_t feature, GridIndex a, GridIndex b) const {
    if (categorical_[feature]) return a == b ? 0 : category_term_;
    __int128 d = static_cast<__int128>(a > b ? a - b : b - a) * weight_[feature];
    return norm_ == Norm::kL1 ? d : d * d;
}

Distance DistanceMetric::operator()(const Point& a, const Point& b) const {
    if (a.size() != weight_.size() || b.size() != weight_.size())
        throw ContractError("distance: point dimension mismatch");
    Distance d;
    for (std::size_t i = 0; i < weight_.size(); ++i) d.raw += term(i, a[i], b[i]);
    return d;
}

double DistanceMetric::to_double(Distance d) const {
    double v = static_cast<double>(d.raw);
    return norm_ == Norm::kL1 ? v / unit_ : std::sqrt(v) / unit_;
}

Point DistanceMetric::project(const Point& x, const Region& region) const {
    if (region.empty()) throw ContractError("projection onto an empty region");
    Point p = x;
    for (std::size_t i = 0; i < region.size(); ++i) {
        const auto& r = region[i];
        if (r.categorical) {
            if (!r.contains(x[i])) p[i] = lowest_category(r.categories);
        } else {
            p[i] = std::clamp(x[i], r.lo, r.hi);
        }
    }
    return p;
}

} // namespace cfx

#ifndef CFX_DISTANCE_HPP
#define CFX_DISTANCE_HPP

#include <compare>
#include <string>
#include <vector>

#include "cfx/schema.hpp"

namespace cfx {

enum class Norm { kL1, kL2 };

const char* to_string(Norm norm);
Norm norm_from_string(const std::string& s);

/// Exact distance in scaled integer units. For L2 this is the scaled
/// squared distance, which orders points identically.
struct Distance {
    __int128 raw = 0;
    auto operator<=>(const Distance&) const = default;
};

/// L1 or L2 over min-max normalized interval features, with one-hot groups
/// contributing their axis Hamming distance (2 when the category differs).
///
/// Every numeric/ordinal/binary term is |dz| / max_index; all terms are
/// rescaled by the lcm of the max indices so comparisons are exact.
class DistanceMetric {
public:
    explicit DistanceMetric(const FeatureSchema& schema, Norm norm = Norm::kL2);

    Norm norm() const { return norm_; }

    Distance operator()(const Point& a, const Point& b) const;

    /// Real-valued distance (square root taken for L2).
    double to_double(Distance d) const;

    /// Nearest point of a non-empty region to `x`: clamp intervals, keep the
    /// query category when allowed, otherwise take the lowest allowed one.
    /// This is the unique lexicographically smallest minimizer.
    Point project(const Point& x, const Region& region) const;

private:
    __int128 term(std::size_t feature, GridIndex a, GridIndex b) const;

    Norm norm_;
    std::vector<bool> categorical_;
    std::vector<__int128> weight_;
    __int128 category_term_ = 0;
    double unit_ = 1.0;
};

} // namespace cfx

#endif

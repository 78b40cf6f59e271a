#ifndef CFX_SCHEMA_HPP
#define CFX_SCHEMA_HPP

#include <compare>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace cfx {

/// Position on a feature's grid. For numeric features the real value is
/// lo + index * delta; ordinal and binary features use the level directly;
/// categorical features store the active category of the one-hot group.
using GridIndex = std::int64_t;

/// Bit c set <=> category c allowed. Categorical features are capped at 64.
using CategorySet = std::uint64_t;

/// Exact grid-point count; products over many axes overflow 64 bits.
using GridVolume = boost::multiprecision::cpp_int;

using Rng = std::mt19937_64;

inline constexpr int kMaxCategories = 64;

enum class FeatureKind { kNumeric, kOrdinal, kBinary, kCategorical };

const char* to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::kNumeric;
    double lo = 0.0;
    double hi = 1.0;
    double delta = 1.0;
    int levels = 0;
    std::vector<std::string> categories;

    static FeatureSpec numeric(std::string name, double lo, double hi, double delta);
    static FeatureSpec ordinal(std::string name, int levels);
    static FeatureSpec binary(std::string name);
    static FeatureSpec categorical(std::string name, int k);
    static FeatureSpec categorical(std::string name, std::vector<std::string> names);

    bool is_categorical() const { return kind == FeatureKind::kCategorical; }
    int category_count() const { return static_cast<int>(categories.size()); }

    /// Number of one-hot axes (k for categorical, otherwise 1).
    int axis_count() const { return is_categorical() ? category_count() : 1; }

    /// Largest grid index: (hi-lo)/delta, levels-1, 1, or k-1.
    GridIndex max_index() const;

    /// Real value of a grid index on an interval feature.
    double value_at(GridIndex index) const;

    /// Nearest grid index of a real value; throws ContractError when the
    /// value is outside [lo, hi] by more than half a step.
    GridIndex snap(double value) const;

    /// Throws ContractError if the feature definition is inconsistent.
    void validate() const;
};

/// A grid point, one coordinate per feature (not per one-hot axis).
struct Point {
    std::vector<GridIndex> coords;

    Point() = default;
    explicit Point(std::vector<GridIndex> c) : coords(std::move(c)) {}

    std::size_t size() const { return coords.size(); }
    GridIndex& operator[](std::size_t i) { return coords[i]; }
    GridIndex operator[](std::size_t i) const { return coords[i]; }

    auto operator<=>(const Point&) const = default;
};

/// Per-feature restriction of a region: a closed index interval, or an
/// allowed-category set for categorical features.
struct FeatureRange {
    GridIndex lo = 0;
    GridIndex hi = 0;
    CategorySet categories = 0;
    bool categorical = false;

    static FeatureRange interval(GridIndex lo, GridIndex hi) { return {lo, hi, 0, false}; }
    static FeatureRange category_set(CategorySet cats) { return {0, 0, cats, true}; }

    bool empty() const { return categorical ? categories == 0 : lo > hi; }
    bool contains(GridIndex v) const;
    GridIndex cardinality() const;

    bool operator==(const FeatureRange&) const = default;
};

/// Axis-aligned subset of the grid: the product of its feature ranges.
struct Region {
    std::vector<FeatureRange> ranges;

    std::size_t size() const { return ranges.size(); }
    const FeatureRange& operator[](std::size_t i) const { return ranges[i]; }
    FeatureRange& operator[](std::size_t i) { return ranges[i]; }

    bool empty() const;
    bool contains(const Point& p) const;

    /// Componentwise intersection; the result may be empty.
    Region intersect(const Region& other) const;

    /// Lowest grid point of every range (lowest category for one-hot groups).
    Point lower_corner() const;

    bool operator==(const Region&) const = default;
};

/// Ordered list of features defining the quantized input domain.
class FeatureSchema {
public:
    FeatureSchema() = default;
    explicit FeatureSchema(std::vector<FeatureSpec> features);

    std::size_t size() const { return features_.size(); }
    const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
    const std::vector<FeatureSpec>& features() const { return features_; }

    /// Total one-hot axis count m.
    int axis_count() const { return axis_count_; }
    /// First one-hot axis of a feature.
    int first_axis(std::size_t feature) const { return axis_offset_[feature]; }
    /// Feature owning an axis.
    std::size_t feature_of_axis(int axis) const;

    Region full_region() const;
    bool contains(const Point& p) const;
    /// Throws ContractError unless `p` is a valid point of this schema.
    void check_point(const Point& p) const;
    /// Throws ContractError unless `r` has the right shape and lies in the domain.
    void check_region(const Region& r) const;

    /// Per-axis real values (one-hot groups expanded).
    std::vector<double> axis_values(const Point& p) const;
    /// Inverse of axis_values; throws ContractError on malformed input.
    Point from_axis_values(const std::vector<double>& values) const;

    GridVolume total_volume() const;

    bool operator==(const FeatureSchema& other) const;

private:
    std::vector<FeatureSpec> features_;
    std::vector<int> axis_offset_;
    int axis_count_ = 0;
};

/// Center grid point: interval midpoints rounded down, lowest allowed category.
Point center(const Region& region);

/// One node of a split chain: the test and which side holds the peeled piece.
struct SplitTest {
    std::size_t feature = 0;
    bool categorical = false;
    GridIndex threshold = 0;      // interval: left iff z <= threshold
    CategorySet left_categories = 0; // categorical: left iff category in set

    bool goes_left(const Point& p) const;
    /// One-hot axis the test thresholds (for categorical: the singleton's axis).
    int axis(const FeatureSchema& schema) const;

    bool operator==(const SplitTest&) const = default;
};

struct SplitStep {
    SplitTest test;
    bool peel_is_left = false;
};

/// pieces[k] for k < steps.size() is the piece peeled by steps[k]; the last
/// piece is the remainder containing the counterfactual.
struct SplitResult {
    std::vector<Region> pieces;
    std::vector<SplitStep> steps;
};

/// Peels the query side off `region` along every coordinate where `x` and
/// `x_cf` differ, in ascending one-hot axis order.
SplitResult split(const Region& region, const Point& x, const Point& x_cf);

GridVolume grid_volume(const Region& region);
GridVolume grid_volume(const Region& region, const FeatureSchema& schema);

/// Uniform draw over the grid points of a non-empty region.
Point sample_uniform(const Region& region, Rng& rng);

/// Lowest category index in a non-empty set.
int lowest_category(CategorySet set);
int category_count(CategorySet set);

} // namespace cfx

#endif

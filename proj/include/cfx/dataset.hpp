#ifndef CFX_DATASET_HPP
#define CFX_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cfx/cart.hpp"
#include "cfx/io.hpp"
#include "cfx/model.hpp"

namespace cfx {

/// Ingested dataset with a seeded 60/20/20 train/validation/test split.
struct DatasetBundle {
    SchemaPtr schema;
    LabeledData data;
    std::vector<std::string> class_names;
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;

    LabeledData subset(const std::vector<std::size_t>& rows) const;
};

/// Reads a CSV (header row, comma separated) described by a config:
///
///   {"label": "y", "classes": ["no", "yes"],
///    "features": [{"name": "age", "kind": "numeric", "delta": 1},
///                 {"name": "sex", "kind": "binary"},
///                 {"name": "prior", "kind": "ordinal", "levels": 10},
///                 {"name": "race", "kind": "categorical", "categories": ["a", "b"]}]}
///
/// Numeric ranges default to the column min/max; the grid step comes from
/// "delta" or "steps" (default 1000 steps). Values are snapped to the grid.
/// Unknown categories, non-numeric cells and missing labels raise a
/// ParseError carrying the 1-based data row.
DatasetBundle ingest_csv(const std::filesystem::path& path, const Json& config, std::uint64_t seed);
DatasetBundle ingest_csv(std::istream& in, const Json& config, std::uint64_t seed);

/// Writes rows back as CSV with grid values, category names and class names.
void write_csv(std::ostream& out, const DatasetBundle& bundle, const std::string& label_column = "label");

/// Seeded shuffle split into round(0.6 n) / round(0.2 n) / rest.
void split_602020(std::size_t n, std::uint64_t seed, std::vector<std::size_t>& train,
                  std::vector<std::size_t>& validation, std::vector<std::size_t>& test);

} // namespace cfx

#endif

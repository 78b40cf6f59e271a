#ifndef CFX_IO_HPP
#define CFX_IO_HPP

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cfx/model.hpp"
#include "cfx/schema.hpp"

namespace cfx {

using Json = nlohmann::json;

Json to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const Json& j);

/// Per-axis real values (one-hot groups expanded).
Json to_json(const FeatureSchema& schema, const Point& p);
Point point_from_json(const FeatureSchema& schema, const Json& j);

/// One entry per feature: [lo, hi] real bounds, or {"categories": [...]}.
Json to_json(const FeatureSchema& schema, const Region& r);
Region region_from_json(const FeatureSchema& schema, const Json& j);

/// Model JSON: {schema_ref, schema, kind, num_classes, nodes, root} for
/// trees and {..., trees: [{nodes, root}]} for forests. Thresholds are
/// decimal strings of grid values.
Json to_json(const Model& model, const std::string& schema_ref = "embedded");
Model model_from_json(const Json& j, SchemaPtr schema = nullptr);

/// Decimal string of a grid value, shortest round-trip form.
std::string format_grid_value(const FeatureSpec& f, GridIndex index);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

FeatureSchema load_schema(const std::filesystem::path& path);
/// Loads a model; uses the embedded schema or resolves `schema_ref`
/// relative to the model file.
Model load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const Model& model, const std::string& schema_ref = "embedded");

} // namespace cfx

#endif

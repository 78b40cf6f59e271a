#include "cfx/io.hpp"

#include <charconv>
#include <fstream>
#include <map>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

Json tree_nodes_to_json(const FeatureSchema& schema, const TreeModel& tree) {
    Json nodes = Json::array();
    for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
        const auto& n = tree.nodes()[i];
        Json jn;
        jn["id"] = i;
        if (n.leaf) {
            jn["kind"] = "leaf";
            jn["label"] = n.label;
        } else {
            const auto& f = schema[n.test.feature];
            jn["kind"] = "split";
            jn["axis"] = schema.first_axis(n.test.feature);
            if (n.test.categorical) {
                Json cats = Json::array();
                for (int c = 0; c < f.category_count(); ++c)
                    if (n.test.left_categories & (CategorySet{1} << c)) cats.push_back(c);
                jn["categories"] = cats;
            } else {
                jn["threshold"] = format_grid_value(f, n.test.threshold);
            }
            jn["left"] = n.left;
            jn["right"] = n.right;
        }
        nodes.push_back(jn);
    }
    return nodes;
}

TreeModel tree_from_json(const Json& nodes, const Json& root, SchemaPtr schema, int num_classes) {
    const auto& sc = *schema;
    TreeModel tree(schema, num_classes);
    std::map<long, int> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        long id = nodes[i].contains("id") ? nodes[i]["id"].get<long>() : static_cast<long>(i);
        if (!index.emplace(id, static_cast<int>(i)).second)
            throw ContractError("duplicate node id " + std::to_string(id));
        tree.add_leaf(0);
    }
    auto resolve = [&](const Json& ref) {
        auto it = index.find(ref.get<long>());
        if (it == index.end()) throw ContractError("unknown node id " + ref.dump());
        return it->second;
    };
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Json& jn = nodes[i];
        std::string kind = jn.at("kind");
        if (kind == "leaf") {
            tree.node(static_cast<int>(i)).label = jn.at("label").is_null() ? kUnknownLabel : jn.at("label").get<int>();
        } else if (kind == "split") {
            SplitTest t;
            t.feature = sc.feature_of_axis(jn.at("axis").get<int>());
            const auto& f = sc[t.feature];
            if (jn.contains("categories")) {
                if (!f.is_categorical()) throw ContractError("category split on a non-categorical axis");
                t.categorical = true;
                for (int c : jn["categories"].get<std::vector<int>>()) {
                    if (c < 0 || c >= f.category_count()) throw ContractError("split category out of range");
                    t.left_categories |= CategorySet{1} << c;
                }
            } else {
                if (f.is_categorical()) {
                    // Threshold on a single one-hot axis: z_axis <= 0.5 means "not that category".
                    int c = jn.at("axis").get<int>() - sc.first_axis(t.feature);
                    t.categorical = true;
                    CategorySet all = f.category_count() >= kMaxCategories ? ~CategorySet{0}
                                                                           : (CategorySet{1} << f.category_count()) - 1;
                    t.left_categories = all & ~(CategorySet{1} << c);
                } else {
                    const Json& th = jn.at("threshold");
                    double v = th.is_string() ? std::stod(th.get<std::string>()) : th.get<double>();
                    t.threshold = f.snap(v);
                }
            }
            tree.make_split(static_cast<int>(i), t, resolve(jn.at("left")), resolve(jn.at("right")));
        } else {
            throw ContractError("unknown node kind '" + kind + "'");
        }
    }
    tree.set_root(resolve(root));
    tree.validate();
    return tree;
}

} // namespace

std::string format_grid_value(const FeatureSpec& f, GridIndex index) {
    if (f.kind != FeatureKind::kNumeric) return std::to_string(index);
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, f.value_at(index));
    return std::string(buf, res.ptr);
}

Json to_json(const FeatureSchema& schema) {
    Json feats = Json::array();
    for (const auto& f : schema.features()) {
        Json jf;
        jf["name"] = f.name;
        jf["kind"] = to_string(f.kind);
        switch (f.kind) {
        case FeatureKind::kNumeric:
            jf["lo"] = f.lo;
            jf["hi"] = f.hi;
            jf["delta"] = f.delta;
            break;
        case FeatureKind::kOrdinal: jf["levels"] = f.levels; break;
        case FeatureKind::kBinary: break;
        case FeatureKind::kCategorical: jf["categories"] = f.categories; break;
        }
        feats.push_back(jf);
    }
    return Json{{"features", feats}};
}

FeatureSchema schema_from_json(const Json& j) {
    std::vector<FeatureSpec> specs;
    const Json& feats = j.at("features");
    for (std::size_t i = 0; i < feats.size(); ++i) {
        const Json& jf = feats[i];
        std::string name = jf.value("name", "x" + std::to_string(i));
        switch (feature_kind_from_string(jf.at("kind"))) {
        case FeatureKind::kNumeric:
            specs.push_back(FeatureSpec::numeric(name, jf.at("lo"), jf.at("hi"), jf.at("delta")));
            break;
        case FeatureKind::kOrdinal: specs.push_back(FeatureSpec::ordinal(name, jf.at("levels"))); break;
        case FeatureKind::kBinary: specs.push_back(FeatureSpec::binary(name)); break;
        case FeatureKind::kCategorical:
            if (jf.contains("categories"))
                specs.push_back(FeatureSpec::categorical(name, jf["categories"].get<std::vector<std::string>>()));
            else
                specs.push_back(FeatureSpec::categorical(name, jf.at("k").get<int>()));
            break;
        }
    }
    return FeatureSchema(std::move(specs));
}

Json to_json(const FeatureSchema& schema, const Point& p) { return Json(schema.axis_values(p)); }

Point point_from_json(const FeatureSchema& schema, const Json& j) {
    return schema.from_axis_values(j.get<std::vector<double>>());
}

Json to_json(const FeatureSchema& schema, const Region& r) {
    schema.check_region(r);
    Json out = Json::array();
    for (std::size_t i = 0; i < r.size(); ++i) {
        const auto& f = schema[i];
        if (r[i].categorical) {
            Json cats = Json::array();
            for (int c = 0; c < f.category_count(); ++c)
                if (r[i].contains(c)) cats.push_back(c);
            out.push_back(Json{{"categories", cats}});
        } else {
            out.push_back(Json::array({f.value_at(r[i].lo), f.value_at(r[i].hi)}));
        }
    }
    return out;
}

Region region_from_json(const FeatureSchema& schema, const Json& j) {
    if (j.size() != schema.size()) throw ContractError("region has the wrong number of features");
    Region r;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const auto& f = schema[i];
        if (f.is_categorical()) {
            CategorySet s = 0;
            for (int c : j[i].at("categories").get<std::vector<int>>()) s |= CategorySet{1} << c;
            r.ranges.push_back(FeatureRange::category_set(s));
        } else {
            r.ranges.push_back(FeatureRange::interval(f.snap(j[i].at(0)), f.snap(j[i].at(1))));
        }
    }
    schema.check_region(r);
    return r;
}

Json to_json(const Model& model, const std::string& schema_ref) {
    const auto& schema = model.schema();
    Json j;
    j["format"] = "cfx-model/1";
    j["schema_ref"] = schema_ref;
    j["schema"] = to_json(schema);
    j["num_classes"] = model.num_classes();
    if (model.is_tree()) {
        j["kind"] = "tree";
        j["nodes"] = tree_nodes_to_json(schema, model.tree());
        j["root"] = model.tree().root();
    } else {
        j["kind"] = "forest";
        Json trees = Json::array();
        for (const auto& t : model.forest().trees())
            trees.push_back(Json{{"nodes", tree_nodes_to_json(schema, t)}, {"root", t.root()}});
        j["trees"] = trees;
    }
    return j;
}

Model model_from_json(const Json& j, SchemaPtr schema) {
    if (!schema) {
        if (!j.contains("schema")) throw ContractError("model JSON has no embedded schema and none was supplied");
        schema = std::make_shared<const FeatureSchema>(schema_from_json(j["schema"]));
    }
    int num_classes = j.value("num_classes", 2);
    std::string kind = j.value("kind", "tree");
    if (kind == "tree") return Model(tree_from_json(j.at("nodes"), j.at("root"), schema, num_classes));
    if (kind == "forest") {
        std::vector<TreeModel> trees;
        for (const auto& jt : j.at("trees")) trees.push_back(tree_from_json(jt.at("nodes"), jt.at("root"), schema, num_classes));
        return Model(ForestModel(schema, num_classes, std::move(trees)));
    }
    throw ContractError("unknown model kind '" + kind + "'");
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

FeatureSchema load_schema(const std::filesystem::path& path) { return schema_from_json(read_json_file(path)); }

Model load_model(const std::filesystem::path& path) {
    Json j = read_json_file(path);
    if (!j.contains("schema") && j.contains("schema_ref")) {
        auto ref = path.parent_path() / j["schema_ref"].get<std::string>();
        return model_from_json(j, std::make_shared<const FeatureSchema>(load_schema(ref)));
    }
    return model_from_json(j);
}

void save_model(const std::filesystem::path& path, const Model& model, const std::string& schema_ref) {
    write_json_file(path, to_json(model, schema_ref));
}

} // namespace cfx

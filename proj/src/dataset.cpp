#include "cfx/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        auto b = s.find_first_not_of(" \t");
        auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    }
    return out;
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

bool parse_double(const std::string& s, double& v) {
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

struct Column {
    std::string name;
    FeatureKind kind;
    Json config;
    std::size_t csv_index = 0;
    std::vector<std::string> names; // categorical only
};

int index_of(const std::vector<std::string>& names, const std::string& v) {
    auto it = std::find(names.begin(), names.end(), v);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

} // namespace

LabeledData DatasetBundle::subset(const std::vector<std::size_t>& rows) const {
    LabeledData d;
    for (auto r : rows) d.add(data.points[r], data.labels[r]);
    return d;
}

void split_602020(std::size_t n, std::uint64_t seed, std::vector<std::size_t>& train,
                  std::vector<std::size_t>& validation, std::vector<std::size_t>& test) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(n)));
    auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n))));
    train.assign(idx.begin(), idx.begin() + static_cast<long>(n_train));
    validation.assign(idx.begin() + static_cast<long>(n_train), idx.begin() + static_cast<long>(n_train + n_val));
    test.assign(idx.begin() + static_cast<long>(n_train + n_val), idx.end());
}

DatasetBundle ingest_csv(const std::filesystem::path& path, const Json& config, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return ingest_csv(in, config, seed);
}

DatasetBundle ingest_csv(std::istream& in, const Json& config, std::uint64_t seed) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("CSV has no header row");
    auto header = split_csv_line(line);
    auto column_of = [&](const std::string& name) {
        int i = index_of(header, name);
        if (i < 0) throw ParseError("CSV has no column '" + name + "'");
        return static_cast<std::size_t>(i);
    };

    const std::string label_name = config.value("label", "label");
    const std::size_t label_col = column_of(label_name);
    std::vector<Column> cols;
    for (const auto& jf : config.at("features")) {
        Column c;
        c.name = jf.at("name");
        c.kind = feature_kind_from_string(jf.at("kind"));
        c.config = jf;
        c.csv_index = column_of(c.name);
        if (c.kind == FeatureKind::kCategorical) {
            c.names = jf.at("categories").get<std::vector<std::string>>();
        }
        cols.push_back(std::move(c));
    }

    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " cells, found " +
                                 std::to_string(cells.size()),
                             static_cast<long>(rows.size() + 1));
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw ParseError("CSV has no data rows");

    // Raw values first, so numeric ranges can come from the data.
    std::vector<std::vector<double>> raw(cols.size(), std::vector<double>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const long row = static_cast<long>(r + 1);
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const auto& c = cols[j];
            const std::string& cell = rows[r][c.csv_index];
            double v = 0;
            if (!c.names.empty()) {
                int k = index_of(c.names, cell);
                if (k < 0) throw ParseError("unknown category '" + cell + "' in column '" + c.name + "'", row);
                v = k;
            } else if (!parse_double(cell, v)) {
                throw ParseError("non-numeric value '" + cell + "' in column '" + c.name + "'", row);
            }
            raw[j][r] = v;
        }
    }

    std::vector<FeatureSpec> specs;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const auto& c = cols[j];
        const Json& jf = c.config;
        switch (c.kind) {
        case FeatureKind::kNumeric: {
            auto [mn, mx] = std::minmax_element(raw[j].begin(), raw[j].end());
            double lo = jf.value("lo", *mn);
            double hi = jf.value("hi", *mx);
            double delta = jf.contains("delta") ? jf["delta"].get<double>()
                                                : (hi > lo ? (hi - lo) / jf.value("steps", 1000) : 1.0);
            auto k = std::max<long long>(1, std::llround((hi - lo) / delta));
            specs.push_back(FeatureSpec::numeric(c.name, lo, lo + static_cast<double>(k) * delta, delta));
            break;
        }
        case FeatureKind::kOrdinal:
            specs.push_back(FeatureSpec::ordinal(c.name, jf.at("levels").get<int>()));
            break;
        case FeatureKind::kBinary: specs.push_back(FeatureSpec::binary(c.name)); break;
        case FeatureKind::kCategorical: specs.push_back(FeatureSpec::categorical(c.name, c.names)); break;
        }
    }

    DatasetBundle b;
    b.schema = std::make_shared<const FeatureSchema>(FeatureSchema(std::move(specs)));
    b.seed = seed;
    const auto& sc = *b.schema;

    std::map<std::string, Label> class_ids;
    if (config.contains("classes")) {
        b.class_names = config["classes"].get<std::vector<std::string>>();
        for (std::size_t i = 0; i < b.class_names.size(); ++i) class_ids[b.class_names[i]] = static_cast<Label>(i);
    } else {
        std::vector<std::string> seen;
        for (const auto& r : rows)
            if (!r[label_col].empty()) seen.push_back(r[label_col]);
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        b.class_names = seen;
        for (std::size_t i = 0; i < seen.size(); ++i) class_ids[seen[i]] = static_cast<Label>(i);
    }

    for (std::size_t r = 0; r < rows.size(); ++r) {
        const long row = static_cast<long>(r + 1);
        Point p;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const auto& f = sc[j];
            double v = raw[j][r];
            GridIndex idx = 0;
            if (f.kind == FeatureKind::kNumeric) {
                idx = std::clamp<GridIndex>(std::llround((v - f.lo) / f.delta), 0, f.max_index());
                if (v < f.lo - f.delta / 2 || v > f.hi + f.delta / 2)
                    throw ParseError("value " + rows[r][cols[j].csv_index] + " outside the configured range of '" +
                                         f.name + "'",
                                     row);
            } else {
                idx = static_cast<GridIndex>(v);
                if (static_cast<double>(idx) != v || idx < 0 || idx > f.max_index())
                    throw ParseError("invalid level '" + rows[r][cols[j].csv_index] + "' in column '" + f.name + "'",
                                     row);
            }
            p.coords.push_back(idx);
        }
        const std::string& lab = rows[r][label_col];
        if (lab.empty()) throw ParseError("missing label", row);
        auto it = class_ids.find(lab);
        if (it == class_ids.end()) throw ParseError("unknown class '" + lab + "'", row);
        b.data.add(std::move(p), it->second);
    }
    split_602020(rows.size(), seed, b.train, b.validation, b.test);
    return b;
}

void write_csv(std::ostream& out, const DatasetBundle& bundle, const std::string& label_column) {
    const auto& sc = *bundle.schema;
    for (std::size_t j = 0; j < sc.size(); ++j) out << quote(sc[j].name) << ',';
    out << quote(label_column) << '\n';
    for (std::size_t r = 0; r < bundle.data.size(); ++r) {
        const auto& p = bundle.data.points[r];
        for (std::size_t j = 0; j < sc.size(); ++j) {
            const auto& f = sc[j];
            if (f.is_categorical())
                out << quote(f.categories[static_cast<std::size_t>(p[j])]);
            else
                out << format_grid_value(f, p[j]);
            out << ',';
        }
        auto y = static_cast<std::size_t>(bundle.data.labels[r]);
        out << quote(y < bundle.class_names.size() ? bundle.class_names[y] : std::to_string(y)) << '\n';
    }
}

} // namespace cfx

// cfx: generate targets, train models, run extraction attacks, evaluate.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "cfx/baselines.hpp"
#include "cfx/cart.hpp"
#include "cfx/dataset.hpp"
#include "cfx/errors.hpp"
#include "cfx/eval.hpp"
#include "cfx/instances.hpp"
#include "cfx/io.hpp"
#include "cfx/oracle.hpp"
#include "cfx/tra.hpp"

namespace fs = std::filesystem;
using namespace cfx;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitContract = 2;
constexpr int kExitCapacity = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<int> parse_counts(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

std::pair<int, int> parse_range(const std::string& s) {
    auto dash = s.find('-');
    if (dash == std::string::npos) return {std::stoi(s), std::stoi(s)};
    return {std::stoi(s.substr(0, dash)), std::stoi(s.substr(dash + 1))};
}

void emit(const Json& j, const std::string& out) {
    if (out.empty() || out == "-")
        std::cout << j.dump(2) << '\n';
    else
        write_json_file(out, j);
}

Json bound_json(const BoundReport& b) {
    return Json{{"n", b.n},
                {"m", b.m},
                {"s", b.s},
                {"product_bound", b.product_bound.str()},
                {"balanced_bound", to_string(b.balanced_bound)},
                {"worst_case_queries", b.worst_case_queries.str()},
                {"opt_queries_lower", b.opt_queries_lower.str()},
                {"c_tra", to_string(b.c_tra)}};
}

// ---- gen -------------------------------------------------------------------

struct GenOptions {
    std::string kind = "random";
    std::string schema;
    std::string out;
    int depth = 4;
    int trees = 5;
    int classes = 2;
    std::uint64_t seed = 0;
    std::string s;
    double delta = 1.0 / 1024;
    std::string labels = "coloring";
};

int run_gen(const GenOptions& o) {
    auto load = [&]() {
        if (o.schema.empty()) throw UsageError("--schema is required for --kind " + o.kind);
        return std::make_shared<const FeatureSchema>(load_schema(o.schema));
    };
    std::optional<Model> m;
    if (o.kind == "random") {
        m.emplace(gen_random_tree(load(), o.depth, o.seed, o.classes));
    } else if (o.kind == "forest") {
        m.emplace(gen_random_forest(load(), o.trees, o.depth, o.seed, o.classes));
    } else if (o.kind == "chessboard") {
        auto s = parse_counts(o.s);
        auto schema = o.schema.empty()
                          ? std::make_shared<const FeatureSchema>(unit_schema(static_cast<int>(s.size()), o.delta))
                          : load();
        m.emplace(gen_chessboard(schema, s));
    } else if (o.kind == "adversarial") {
        AdversarialSpec spec;
        spec.s = parse_counts(o.s);
        spec.delta = o.delta;
        if (o.labels == "alternating")
            spec.labels = LabelScheme::kAlternating;
        else if (o.labels != "coloring")
            throw UsageError("--labels must be coloring or alternating");
        m.emplace(gen_adversarial(spec));
    } else {
        throw UsageError("unknown --kind '" + o.kind + "'");
    }
    save_model(o.out, *m);
    return 0;
}

// ---- train -----------------------------------------------------------------

struct TrainOptions {
    std::string data;
    std::string config;
    std::string out;
    std::string model = "tree";
    std::uint64_t seed = 0;
    int trees = 5;
    int max_depth = -1;
    bool prune = false;
    std::string report;
};

int run_train(const TrainOptions& o) {
    DatasetBundle b = ingest_csv(o.data, read_json_file(o.config), o.seed);
    TrainConfig tc;
    tc.seed = o.seed;
    tc.num_classes = std::max<int>(2, static_cast<int>(b.class_names.size()));
    if (o.max_depth >= 0) tc.max_depth = o.max_depth;
    LabeledData train = b.subset(b.train);
    std::optional<Model> m;
    if (o.model == "tree") {
        TreeModel t = train_tree(b.schema, train, tc);
        if (o.prune) {
            LabeledData val = b.subset(b.validation);
            if (val.empty()) throw ContractError("pruning needs a non-empty validation split");
            t = prune(t, train, val, tc);
        }
        m.emplace(std::move(t));
    } else if (o.model == "forest") {
        if (o.prune) throw UsageError("--prune applies to single trees only");
        tc.n_trees = o.trees;
        m.emplace(train_forest(b.schema, train, tc));
    } else {
        throw UsageError("--model must be tree or forest");
    }
    save_model(o.out, *m);
    Json rep{{"train_accuracy", accuracy(*m, train)},
             {"validation_accuracy", accuracy(*m, b.subset(b.validation))},
             {"test_accuracy", accuracy(*m, b.subset(b.test))},
             {"rows", b.data.size()},
             {"split", {b.train.size(), b.validation.size(), b.test.size()}}};
    emit(rep, o.report);
    return 0;
}

// ---- attack ----------------------------------------------------------------

struct AttackOptions {
    std::string method = "tra";
    std::string oracle = "exact";
    std::string target;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    std::size_t budget = 0;
    std::size_t cadence = 20;
    std::string order = "fifo";
    std::string norm = "l2";
    std::size_t samples = 1000;
    std::size_t train_points = 500;
    std::size_t fidelity_samples = 3000;
    std::string surrogate = "tree";
    double epsilon = 1e-5;
};

struct AttackOutcome {
    Model model;
    std::vector<Snapshot> snapshots;
    std::size_t queries = 0;
    bool certified = false;
};

void write_trace(const fs::path& path, const FeatureSchema& schema, const std::vector<QueryRecord>& records) {
    std::ofstream out(path);
    for (const auto& r : records) {
        Json j{{"index", r.response.query_index},
               {"x", to_json(schema, r.x)},
               {"region", to_json(schema, r.region)},
               {"label", r.response.label},
               {"counterfactual",
                r.response.counterfactual ? to_json(schema, *r.response.counterfactual) : Json(nullptr)}};
        out << j.dump() << '\n';
    }
}

int run_attack(const AttackOptions& o) {
    Model target = load_model(o.target);
    const auto& schema = target.schema();
    fs::create_directories(o.out_dir);
    const fs::path dir(o.out_dir);

    if (o.method == "pathfinding" && !target.is_tree())
        throw UsageError("--method pathfinding needs a single-tree target (it relies on leaf identifiers)");

    OracleConfig oc;
    oc.norm = norm_from_string(o.norm);
    oc.mode = oracle_mode_from_string(o.oracle);
    oc.samples = o.samples;
    oc.seed = o.seed;
    oc.keep_records = true;
    if (oc.mode == OracleMode::kHeuristic) {
        Rng rng(o.seed ^ 0x9e3779b97f4a7c15ULL);
        Region full = schema.full_region();
        for (std::size_t i = 0; i < o.train_points; ++i) oc.training_data.push_back(sample_uniform(full, rng));
    }

    std::optional<AttackOutcome> res;
    std::vector<QueryRecord> records;
    if (o.method == "tra") {
        auto oracle = make_oracle(target, oc);
        TraConfig tc;
        tc.order = queue_order_from_string(o.order);
        tc.seed = o.seed;
        tc.snapshot_every = o.cadence;
        if (o.budget > 0) tc.max_queries = o.budget;
        TraResult r = tra_extract(*oracle, tc);
        bool certified = r.complete && oc.mode == OracleMode::kExact;
        res.emplace(AttackOutcome{Model(r.model), std::move(r.snapshots), r.queries, certified});
        records = oracle->meter().records();
    } else if (o.method == "pathfinding") {
        LeafIdOracle oracle(target);
        PathFindingResult r = pathfinding_extract(oracle, o.epsilon);
        Model m(r.model);
        res.emplace(AttackOutcome{m, {{r.queries, m, 0, 0.0}}, r.queries, false});
    } else if (o.method == "cf" || o.method == "dualcf") {
        auto oracle = make_oracle(target, oc);
        AttackConfig ac;
        ac.budget = o.budget > 0 ? o.budget : default_budget(target);
        ac.seed = o.seed;
        ac.snapshot_every = o.cadence;
        ac.train.seed = o.seed;
        if (o.surrogate == "forest")
            ac.surrogate = SurrogateKind::kForest;
        else if (o.surrogate != "tree")
            throw UsageError("--surrogate must be tree or forest");
        AttackResult r = o.method == "cf" ? cf_attack(*oracle, ac) : dualcf_attack(*oracle, ac);
        res.emplace(AttackOutcome{r.model, std::move(r.snapshots), r.queries, false});
        records = oracle->meter().records();
    } else {
        throw UsageError("unknown --method '" + o.method + "'");
    }

    save_model(dir / "extracted.json", res->model);
    write_trace(dir / "trace.jsonl", schema, records);
    auto points = uniform_points(schema, o.fidelity_samples, o.seed + 1);
    {
        std::ofstream csv(dir / "anytime.csv");
        csv << "queries,certified_fraction,fidelity_uniform,attack\n";
        for (const auto& s : res->snapshots)
            csv << s.queries << ',' << s.certified_fraction << ',' << fidelity(s.model, target, points).fidelity << ','
                << o.method << '\n';
    }
    Json summary{{"attack", o.method},
                 {"oracle", o.method == "pathfinding" ? "leaf-id" : o.oracle},
                 {"queries", res->queries},
                 {"certified", res->certified},
                 {"fidelity_uniform", fidelity(res->model, target, points).fidelity}};
    write_json_file(dir / "summary.json", summary);
    std::cout << summary.dump() << '\n';
    return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalOptions {
    std::vector<std::string> equivalence;
    std::vector<std::string> fidelity;
    std::string bounds;
    std::string s;
    std::size_t samples = 3000;
    std::uint64_t seed = 0;
    std::size_t cell_cap = 50'000'000;
    std::string out;
};

int run_eval(const EvalOptions& o) {
    Json rep = Json::object();
    if (!o.equivalence.empty()) {
        Model a = load_model(o.equivalence[0]);
        Model b = load_model(o.equivalence[1]);
        EquivalenceResult r = functional_equivalence(a, b, o.cell_cap);
        rep["equivalent"] = r.equivalent;
        rep["cells"] = r.cells;
        rep["witness"] = r.witness ? to_json(a.schema(), *r.witness) : Json(nullptr);
    }
    if (!o.fidelity.empty()) {
        Model a = load_model(o.fidelity[0]);
        Model b = load_model(o.fidelity[1]);
        FidelityReport r = fidelity(a, b, o.samples, o.seed);
        rep["fidelity"] = {{"fidelity", r.fidelity}, {"sample_count", r.sample_count}, {"seed", r.seed},
                           {"kind", r.kind}};
    }
    if (!o.bounds.empty()) rep["bounds"] = bound_json(bound_report(load_model(o.bounds)));
    if (!o.s.empty()) rep["bounds"] = bound_json(bound_report(parse_counts(o.s)));
    if (rep.empty()) throw UsageError("eval needs --equivalence, --fidelity, --bounds or --s");
    emit(rep, o.out);
    return 0;
}

// ---- report ----------------------------------------------------------------

struct ReportOptions {
    std::vector<std::string> runs;
    std::size_t step = 20;
    std::string column = "fidelity_uniform";
    std::string out;
    // Experiment mode.
    std::string schema;
    std::string depths = "2-8";
    int seeds = 5;
    std::string methods = "tra,cf,dualcf";
    std::string out_dir;
    std::size_t fidelity_samples = 3000;
};

Curve read_curve(const fs::path& csv, const std::string& column) {
    std::ifstream in(csv);
    if (!in) throw ParseError("cannot open " + csv.string());
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string h;
        while (std::getline(ss, h, ',')) header.push_back(h);
    }
    auto col = std::find(header.begin(), header.end(), column) - header.begin();
    if (static_cast<std::size_t>(col) >= header.size()) throw ParseError(csv.string() + ": no column " + column);
    Curve c;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != header.size()) throw ParseError(csv.string() + ": malformed row", row);
        c.push_back({std::stoull(cells[0]), std::stod(cells[static_cast<std::size_t>(col)])});
    }
    return c;
}

void write_curve(std::ostream& out, const Curve& c) {
    out << "queries,mean_fidelity\n";
    for (const auto& p : c) out << p.queries << ',' << p.value << '\n';
}

int run_report(const ReportOptions& o) {
    if (o.schema.empty()) {
        if (o.runs.empty()) throw UsageError("report needs --runs or --schema (experiment mode)");
        std::vector<Curve> curves;
        for (const auto& r : o.runs) {
            fs::path p(r);
            curves.push_back(read_curve(fs::is_directory(p) ? p / "anytime.csv" : p, o.column));
        }
        Curve mean = anytime_fidelity(curves, o.step);
        if (o.out.empty()) {
            write_curve(std::cout, mean);
        } else {
            std::ofstream f(o.out);
            write_curve(f, mean);
        }
        return 0;
    }

    if (o.out_dir.empty()) throw UsageError("experiment mode needs --out-dir");
    auto schema = std::make_shared<const FeatureSchema>(load_schema(o.schema));
    auto [dlo, dhi] = parse_range(o.depths);
    std::vector<std::string> methods;
    {
        std::stringstream ss(o.methods);
        std::string m;
        while (std::getline(ss, m, ',')) methods.push_back(m);
    }
    fs::create_directories(o.out_dir);
    std::map<std::string, std::vector<Curve>> curves;
    Json runs = Json::array();
    for (int depth = dlo; depth <= dhi; ++depth) {
        for (int seed = 1; seed <= o.seeds; ++seed) {
            Model target(gen_random_tree(schema, depth, static_cast<std::uint64_t>(1000 * depth + seed)));
            auto points = uniform_points(*schema, o.fidelity_samples, static_cast<std::uint64_t>(seed));
            std::size_t tra_budget = 0;
            for (const auto& m : methods) {
                std::vector<Snapshot> snaps;
                std::size_t q = 0;
                if (m == "tra") {
                    ExactOracle oracle(target);
                    TraConfig tc;
                    tc.snapshot_every = o.step;
                    TraResult r = tra_extract(oracle, tc);
                    snaps = std::move(r.snapshots);
                    q = tra_budget = r.queries;
                } else if (m == "cf" || m == "dualcf") {
                    ExactOracle oracle(target);
                    AttackConfig ac;
                    ac.budget = tra_budget > 0 ? tra_budget : default_budget(target);
                    ac.seed = static_cast<std::uint64_t>(seed);
                    ac.snapshot_every = o.step;
                    AttackResult r = m == "cf" ? cf_attack(oracle, ac) : dualcf_attack(oracle, ac);
                    snaps = std::move(r.snapshots);
                    q = r.queries;
                } else if (m == "pathfinding") {
                    LeafIdOracle oracle(target);
                    PathFindingResult r = pathfinding_extract(oracle);
                    Model pm(r.model);
                    snaps.push_back({r.queries, pm, 0, 0.0});
                    q = r.queries;
                } else {
                    throw UsageError("unknown method '" + m + "'");
                }
                curves[m].push_back(snapshot_fidelity(snaps, target, points));
                runs.push_back({{"method", m}, {"depth", depth}, {"seed", seed}, {"queries", q}});
            }
        }
    }
    for (const auto& [m, cs] : curves) {
        std::ofstream f(fs::path(o.out_dir) / (m + "_curve.csv"));
        write_curve(f, anytime_fidelity(cs, o.step));
    }
    write_json_file(fs::path(o.out_dir) / "runs.json", runs);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Counterfactual-based extraction of axis-parallel models"};
    app.require_subcommand(1);

    GenOptions gen;
    auto* g = app.add_subcommand("gen", "Generate a target model");
    g->add_option("--kind", gen.kind, "random | forest | chessboard | adversarial")->capture_default_str();
    g->add_option("--schema", gen.schema, "Schema JSON (random, forest, chessboard)");
    g->add_option("--depth", gen.depth)->capture_default_str();
    g->add_option("--trees", gen.trees)->capture_default_str();
    g->add_option("--classes", gen.classes)->capture_default_str();
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_option("--s", gen.s, "Split counts per dimension, e.g. 2,1");
    g->add_option("--delta", gen.delta, "Grid step of generated unit schemas")->capture_default_str();
    g->add_option("--labels", gen.labels, "coloring | alternating (adversarial)")->capture_default_str();
    g->add_option("--out", gen.out, "Model JSON output")->required();

    TrainOptions tr;
    auto* t = app.add_subcommand("train", "Train a tree or forest on a CSV dataset");
    t->add_option("--data", tr.data)->required();
    t->add_option("--config", tr.config, "Dataset config JSON")->required();
    t->add_option("--out", tr.out)->required();
    t->add_option("--model", tr.model, "tree | forest")->capture_default_str();
    t->add_option("--seed", tr.seed)->capture_default_str();
    t->add_option("--trees", tr.trees)->capture_default_str();
    t->add_option("--max-depth", tr.max_depth, "-1 for unlimited")->capture_default_str();
    t->add_flag("--prune", tr.prune, "Cost-complexity pruning on the validation split");
    t->add_option("--report", tr.report, "Accuracy report JSON (stdout by default)");

    AttackOptions at;
    auto* a = app.add_subcommand("attack", "Run an extraction attack against a target model");
    a->add_option("--method", at.method, "tra | pathfinding | cf | dualcf")->capture_default_str();
    a->add_option("--oracle", at.oracle, "exact | heuristic")->capture_default_str();
    a->add_option("--target", at.target)->required();
    a->add_option("--out-dir", at.out_dir)->capture_default_str();
    a->add_option("--seed", at.seed)->capture_default_str();
    a->add_option("--budget", at.budget, "Query budget (0: unlimited for tra, 50 x nodes for cf/dualcf)");
    a->add_option("--cadence", at.cadence, "Snapshot every N queries (0: final only)")->capture_default_str();
    a->add_option("--order", at.order, "fifo | lifo | random")->capture_default_str();
    a->add_option("--norm", at.norm, "l2 | l1")->capture_default_str();
    a->add_option("--samples", at.samples, "Heuristic oracle sample cap")->capture_default_str();
    a->add_option("--train-points", at.train_points, "Heuristic oracle data size")->capture_default_str();
    a->add_option("--fidelity-samples", at.fidelity_samples)->capture_default_str();
    a->add_option("--surrogate", at.surrogate, "tree | forest")->capture_default_str();
    a->add_option("--epsilon", at.epsilon, "PathFinding precision")->capture_default_str();

    EvalOptions ev;
    auto* e = app.add_subcommand("eval", "Equivalence, fidelity and bound reports");
    e->add_option("--equivalence", ev.equivalence, "Two model files")->expected(2);
    e->add_option("--fidelity", ev.fidelity, "Two model files")->expected(2);
    e->add_option("--bounds", ev.bounds, "Model file");
    e->add_option("--s", ev.s, "Split counts per axis, e.g. 2,1");
    e->add_option("--samples", ev.samples)->capture_default_str();
    e->add_option("--seed", ev.seed)->capture_default_str();
    e->add_option("--cell-cap", ev.cell_cap)->capture_default_str();
    e->add_option("--out", ev.out, "Report JSON (stdout by default)");

    ReportOptions rp;
    auto* r = app.add_subcommand("report", "Aggregate anytime curves over runs");
    r->add_option("--runs", rp.runs, "Run directories or anytime CSV files");
    r->add_option("--step", rp.step)->capture_default_str();
    r->add_option("--column", rp.column)->capture_default_str();
    r->add_option("--out", rp.out, "Curve CSV (stdout by default)");
    r->add_option("--schema", rp.schema, "Experiment mode: schema for random targets");
    r->add_option("--depths", rp.depths)->capture_default_str();
    r->add_option("--seeds", rp.seeds)->capture_default_str();
    r->add_option("--methods", rp.methods)->capture_default_str();
    r->add_option("--out-dir", rp.out_dir);
    r->add_option("--fidelity-samples", rp.fidelity_samples)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err) == 0 ? 0 : kExitUsage;
    }

    try {
        if (*g) return run_gen(gen);
        if (*t) return run_train(tr);
        if (*a) return run_attack(at);
        if (*e) return run_eval(ev);
        if (*r) return run_report(rp);
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const CapacityError& err) {
        std::cerr << "capacity exceeded: " << err.what() << '\n';
        return kExitCapacity;
    } catch (const ContractError& err) {
        std::cerr << "invalid input: " << err.what() << '\n';
        return kExitContract;
    } catch (const ParseError& err) {
        std::cerr << "parse error: " << err.what() << '\n';
        return kExitContract;
    } catch (const Json::exception& err) {
        std::cerr << "invalid JSON: " << err.what() << '\n';
        return kExitContract;
    } catch (const std::invalid_argument& err) {
        std::cerr << "invalid argument: " << err.what() << '\n';
        return kExitUsage;
    }
    return 0;
}

#include "cfx/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

constexpr double kGainTolerance = 1e-12;

double gini(const std::vector<std::size_t>& counts, std::size_t n) {
    if (n == 0) return 0.0;
    double s = 0.0;
    for (auto c : counts) {
        double p = static_cast<double>(c) / static_cast<double>(n);
        s += p * p;
    }
    return 1.0 - s;
}

Label majority(const std::vector<std::size_t>& counts) {
    return static_cast<Label>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

struct Candidate {
    double gain = -1.0;
    SplitTest test;
    bool found = false;
};

class Builder {
public:
    Builder(SchemaPtr schema, const LabeledData& data, const TrainConfig& config, int num_classes,
            std::optional<int> max_features, Rng* rng)
        : schema_(std::move(schema)), data_(data), config_(config), k_(num_classes), max_features_(max_features),
          rng_(rng), tree_(schema_, num_classes) {}

    TreeModel build(std::vector<std::size_t> idx) {
        tree_.set_root(grow(idx, 0));
        return std::move(tree_);
    }

private:
    std::vector<std::size_t> counts(const std::vector<std::size_t>& idx) const {
        std::vector<std::size_t> c(static_cast<std::size_t>(k_), 0);
        for (auto i : idx) ++c[static_cast<std::size_t>(data_.labels[i])];
        return c;
    }

    bool axis_valid(int axis, const std::vector<std::size_t>& idx) const {
        const auto& sc = *schema_;
        std::size_t f = sc.feature_of_axis(axis);
        if (sc[f].is_categorical()) {
            GridIndex c = axis - sc.first_axis(f);
            std::size_t in = 0;
            for (auto i : idx) in += data_.points[i][f] == c;
            return in > 0 && in < idx.size();
        }
        for (auto i : idx)
            if (data_.points[i][f] != data_.points[idx[0]][f]) return true;
        return false;
    }

    void scan_axis(int axis, const std::vector<std::size_t>& idx, double parent, Candidate& best) const {
        const auto& sc = *schema_;
        std::size_t f = sc.feature_of_axis(axis);
        const std::size_t n = idx.size();
        auto consider = [&](double gain, const SplitTest& t) {
            if (!best.found || gain > best.gain + kGainTolerance) {
                best.gain = gain;
                best.test = t;
                best.found = true;
            }
        };
        if (sc[f].is_categorical()) {
            GridIndex c = axis - sc.first_axis(f);
            std::vector<std::size_t> lc(static_cast<std::size_t>(k_), 0), rc(lc);
            std::size_t nl = 0;
            for (auto i : idx) {
                if (data_.points[i][f] == c) {
                    ++lc[static_cast<std::size_t>(data_.labels[i])];
                    ++nl;
                } else {
                    ++rc[static_cast<std::size_t>(data_.labels[i])];
                }
            }
            if (nl == 0 || nl == n) return;
            double w = (static_cast<double>(nl) * gini(lc, nl) + static_cast<double>(n - nl) * gini(rc, n - nl)) /
                       static_cast<double>(n);
            SplitTest t;
            t.feature = f;
            t.categorical = true;
            t.left_categories = CategorySet{1} << c;
            consider(parent - w, t);
            return;
        }
        std::vector<std::pair<GridIndex, Label>> v;
        v.reserve(n);
        for (auto i : idx) v.emplace_back(data_.points[i][f], data_.labels[i]);
        std::sort(v.begin(), v.end());
        std::vector<std::size_t> lc(static_cast<std::size_t>(k_), 0);
        std::vector<std::size_t> rc = counts(idx);
        for (std::size_t j = 0; j + 1 < n; ++j) {
            ++lc[static_cast<std::size_t>(v[j].second)];
            --rc[static_cast<std::size_t>(v[j].second)];
            if (v[j].first == v[j + 1].first) continue;
            std::size_t nl = j + 1;
            double w = (static_cast<double>(nl) * gini(lc, nl) + static_cast<double>(n - nl) * gini(rc, n - nl)) /
                       static_cast<double>(n);
            SplitTest t;
            t.feature = f;
            t.threshold = v[j].first + (v[j + 1].first - v[j].first) / 2;
            consider(parent - w, t);
        }
    }

    std::vector<int> axes_to_scan(const std::vector<std::size_t>& idx) {
        std::vector<int> axes(static_cast<std::size_t>(schema_->axis_count()));
        std::iota(axes.begin(), axes.end(), 0);
        if (!max_features_ || *max_features_ >= schema_->axis_count()) return axes;
        std::shuffle(axes.begin(), axes.end(), *rng_);
        std::vector<int> chosen;
        for (int a : axes) {
            if (static_cast<int>(chosen.size()) >= *max_features_) break;
            if (axis_valid(a, idx)) chosen.push_back(a);
        }
        std::sort(chosen.begin(), chosen.end());
        return chosen;
    }

    int grow(const std::vector<std::size_t>& idx, int depth) {
        auto c = counts(idx);
        Label label = majority(c);
        double parent = gini(c, idx.size());
        bool stop = parent <= 0.0 || static_cast<int>(idx.size()) < config_.min_samples_split ||
                    (config_.max_depth && depth >= *config_.max_depth);
        if (stop) return tree_.add_leaf(label);
        Candidate best;
        for (int a : axes_to_scan(idx)) scan_axis(a, idx, parent, best);
        if (!best.found) return tree_.add_leaf(label);
        std::vector<std::size_t> left, right;
        for (auto i : idx) (best.test.goes_left(data_.points[i]) ? left : right).push_back(i);
        int l = grow(left, depth + 1);
        int r = grow(right, depth + 1);
        return tree_.add_split(best.test, l, r);
    }

    SchemaPtr schema_;
    const LabeledData& data_;
    const TrainConfig& config_;
    int k_;
    std::optional<int> max_features_;
    Rng* rng_;
    TreeModel tree_;
};

int resolve_classes(const LabeledData& data, const TrainConfig& config) {
    Label hi = 1;
    for (Label y : data.labels) {
        if (y < 0) throw ContractError("training labels must be non-negative");
        hi = std::max(hi, y);
    }
    int k = config.num_classes.value_or(hi + 1);
    if (hi >= k) throw ContractError("training label outside [0, num_classes)");
    return k;
}

void check_data(const FeatureSchema& schema, const LabeledData& data) {
    if (data.empty()) throw ContractError("training data is empty");
    if (data.points.size() != data.labels.size()) throw ContractError("points and labels differ in length");
    for (const auto& p : data.points) schema.check_point(p);
}

/// Copies the subtree reachable from the root, turning `collapsed` nodes into leaves.
TreeModel rebuild(const TreeModel& tree, const std::vector<bool>& collapsed, const std::vector<Label>& leaf_label) {
    TreeModel out(tree.schema_ptr(), tree.num_classes());
    auto copy = [&](auto&& self, int i) -> int {
        const auto& n = tree.node(i);
        if (n.leaf || collapsed[static_cast<std::size_t>(i)])
            return out.add_leaf(n.leaf ? n.label : leaf_label[static_cast<std::size_t>(i)]);
        int l = self(self, n.left);
        int r = self(self, n.right);
        return out.add_split(n.test, l, r);
    };
    out.set_root(copy(copy, tree.root()));
    return out;
}

} // namespace

std::vector<double> default_ccp_grid() {
    std::vector<double> g(50);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = 0.2 * static_cast<double>(i) / 49.0;
    return g;
}

TreeModel train_tree(SchemaPtr schema, const LabeledData& data, const TrainConfig& config) {
    check_data(*schema, data);
    int k = resolve_classes(data, config);
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(config.seed);
    Builder b(schema, data, config, k, config.max_features, &rng);
    return b.build(std::move(idx));
}

ForestModel train_forest(SchemaPtr schema, const LabeledData& data, const TrainConfig& config) {
    check_data(*schema, data);
    if (config.n_trees < 1) throw ContractError("forest needs at least one tree");
    int k = resolve_classes(data, config);
    int mf = config.max_features.value_or(
        static_cast<int>(std::ceil(std::sqrt(static_cast<double>(schema->axis_count())))));
    Rng rng(config.seed);
    std::vector<TreeModel> trees;
    for (int t = 0; t < config.n_trees; ++t) {
        std::vector<std::size_t> idx(data.size());
        if (config.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
            for (auto& i : idx) i = pick(rng);
        } else {
            std::iota(idx.begin(), idx.end(), 0);
        }
        Builder b(schema, data, config, k, mf, &rng);
        trees.push_back(b.build(std::move(idx)));
    }
    return ForestModel(schema, k, std::move(trees));
}

TreeModel prune_ccp(const TreeModel& tree, const LabeledData& train, double alpha) {
    check_data(tree.schema(), train);
    const std::size_t nn = tree.nodes().size();
    const auto k = static_cast<std::size_t>(tree.num_classes());
    std::vector<std::vector<std::size_t>> cnt(nn, std::vector<std::size_t>(k, 0));
    for (std::size_t s = 0; s < train.size(); ++s) {
        auto y = static_cast<std::size_t>(train.labels[s]);
        if (y >= k) throw ContractError("training label outside [0, num_classes)");
        int i = tree.root();
        while (true) {
            ++cnt[static_cast<std::size_t>(i)][y];
            const auto& n = tree.node(i);
            if (n.leaf) break;
            i = n.test.goes_left(train.points[s]) ? n.left : n.right;
        }
    }
    const double total = static_cast<double>(train.size());
    std::vector<double> risk(nn);
    std::vector<Label> label(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        std::size_t n = std::accumulate(cnt[i].begin(), cnt[i].end(), std::size_t{0});
        risk[i] = static_cast<double>(n) / total * gini(cnt[i], n);
        label[i] = n == 0 ? tree.nodes()[i].label : majority(cnt[i]);
    }

    std::vector<bool> collapsed(nn, false);
    std::vector<double> subtree_risk(nn);
    std::vector<int> leaves(nn);
    while (true) {
        // Post-order accumulation of subtree risk and leaf counts; track the weakest link.
        int weakest = -1;
        double weakest_g = 0.0;
        auto walk = [&](auto&& self, int i) -> void {
            auto u = static_cast<std::size_t>(i);
            const auto& n = tree.node(i);
            if (n.leaf || collapsed[u]) {
                subtree_risk[u] = risk[u];
                leaves[u] = 1;
                return;
            }
            self(self, n.left);
            self(self, n.right);
            auto l = static_cast<std::size_t>(n.left);
            auto r = static_cast<std::size_t>(n.right);
            subtree_risk[u] = subtree_risk[l] + subtree_risk[r];
            leaves[u] = leaves[l] + leaves[r];
            double g = (risk[u] - subtree_risk[u]) / (leaves[u] - 1);
            if (weakest < 0 || g < weakest_g - kGainTolerance) {
                weakest = i;
                weakest_g = g;
            }
        };
        walk(walk, tree.root());
        if (weakest < 0 || weakest_g > alpha + kGainTolerance) break;
        collapsed[static_cast<std::size_t>(weakest)] = true;
    }
    return rebuild(tree, collapsed, label);
}

TreeModel prune(const TreeModel& tree, const LabeledData& train, const LabeledData& validation,
                const TrainConfig& config) {
    if (validation.empty()) throw ContractError("validation data is empty");
    if (config.ccp_grid.empty()) throw ContractError("pruning grid is empty");
    std::optional<TreeModel> best;
    double best_acc = -1.0;
    for (double alpha : config.ccp_grid) {
        TreeModel cand = prune_ccp(tree, train, alpha);
        double acc = accuracy(Model(cand), validation);
        if (acc >= best_acc - kGainTolerance) {
            best_acc = std::max(acc, best_acc);
            best = std::move(cand);
        }
    }
    return *best;
}

double accuracy(const Model& model, const LabeledData& data) {
    if (data.empty()) return 1.0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < data.size(); ++i) ok += model.predict(data.points[i]) == data.labels[i];
    return static_cast<double>(ok) / static_cast<double>(data.size());
}

} // namespace cfx

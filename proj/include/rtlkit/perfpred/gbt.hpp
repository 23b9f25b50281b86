#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "rtlkit/common/io.hpp"
#include "rtlkit/common/parallel.hpp"
#include "rtlkit/evalkit/regression.hpp"
#include "rtlkit/evalkit/report.hpp"
#include "rtlkit/perfpred/dataset.hpp"

namespace rtlkit::perfpred {

struct GbtParams {
    std::size_t num_trees = 200;
    std::size_t max_depth = 4;
    double shrinkage = 0.1;
    std::size_t min_leaf = 5;
    std::size_t jobs = 1;

    void validate() const {
        require(num_trees >= 1, ErrorKind::Precondition, "num_trees must be at least 1");
        require(max_depth <= 16, ErrorKind::Precondition, "max_depth must be at most 16");
        require(shrinkage > 0 && shrinkage <= 1, ErrorKind::Precondition, "shrinkage must be in (0, 1]");
        require(min_leaf >= 1, ErrorKind::Precondition, "min_leaf must be at least 1");
    }
};

/// One node of a regression tree; `feature < 0` marks a leaf.
/// Rows with x[feature] <= threshold go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double value = 0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root; children always follow their parent

    template <class Row>
    double predict(const Row& x) const {
        std::size_t i = 0;
        while (!nodes[i].is_leaf())
            i = static_cast<double>(x[static_cast<std::size_t>(nodes[i].feature)]) <= nodes[i].threshold
                    ? nodes[i].left
                    : nodes[i].right;
        return nodes[i].value;
    }

    std::size_t depth() const {
        std::vector<std::size_t> d(nodes.size(), 0);
        std::size_t deepest = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            deepest = std::max(deepest, d[i]);
            if (!nodes[i].is_leaf()) d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
        }
        return deepest;
    }

    bool operator==(const RegressionTree&) const = default;
};

struct GbtModel {
    Target target = Target::Area;
    std::size_t num_features = 0;
    double base_prediction = 0;
    double shrinkage = 0.1;
    std::size_t max_depth = 4;
    std::size_t min_leaf = 5;
    std::vector<RegressionTree> trees;

    std::size_t num_trees() const { return trees.size(); }

    template <class Row>
    double predict(const Row& x) const {
        double p = base_prediction;
        for (const auto& t : trees) p += shrinkage * t.predict(x);
        return p;
    }

    std::vector<double> predict(const embedcore::EmbeddingMatrix& x) const {
        require(x.dim == num_features, ErrorKind::Precondition,
                "model expects " + std::to_string(num_features) + " features, data has " + std::to_string(x.dim));
        std::vector<double> out;
        out.reserve(x.count());
        for (std::size_t i = 0; i < x.count(); ++i) out.push_back(predict(x.row(i)));
        return out;
    }

    bool operator==(const GbtModel&) const = default;
};

namespace detail {

struct SplitCandidate {
    double gain = 0;
    int feature = -1;
    double threshold = 0;
};

/// Rows sorted by their full feature vector, then target; this ordering is
/// what makes training independent of the input row order.
inline std::vector<std::size_t> canonical_order(const embedcore::EmbeddingMatrix& x, const std::vector<double>& y) {
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto ra = x.row(a), rb = x.row(b);
        for (std::size_t f = 0; f < ra.size(); ++f)
            if (ra[f] != rb[f]) return ra[f] < rb[f];
        return y[a] < y[b];
    });
    return order;
}

class TreeBuilder {
public:
    TreeBuilder(const std::vector<std::vector<float>>& columns,
                const std::vector<std::vector<std::uint32_t>>& sorted_rows, const GbtParams& params)
        : columns_(columns), sorted_(sorted_rows), params_(params), stamp_(columns.empty() ? 0 : columns[0].size()) {}

    RegressionTree build(const std::vector<double>& residual) {
        residual_ = &residual;
        RegressionTree tree;
        std::vector<std::uint32_t> all(residual.size());
        std::iota(all.begin(), all.end(), 0u);
        grow(tree, all, 0);
        return tree;
    }

private:
    std::uint32_t grow(RegressionTree& tree, const std::vector<std::uint32_t>& rows, std::size_t depth) {
        const auto id = static_cast<std::uint32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        double sum = 0;
        for (auto r : rows) sum += (*residual_)[r];
        tree.nodes[id].value = sum / static_cast<double>(rows.size());
        if (depth >= params_.max_depth || rows.size() < 2 * params_.min_leaf) return id;

        const auto split = best_split(rows, sum);
        if (split.feature < 0) return id;
        std::vector<std::uint32_t> left, right;
        const auto& col = columns_[static_cast<std::size_t>(split.feature)];
        for (auto r : rows) (static_cast<double>(col[r]) <= split.threshold ? left : right).push_back(r);
        tree.nodes[id].feature = split.feature;
        tree.nodes[id].threshold = split.threshold;
        const auto l = grow(tree, left, depth + 1);
        const auto rr = grow(tree, right, depth + 1);
        tree.nodes[id].left = l;
        tree.nodes[id].right = rr;
        return id;
    }

    SplitCandidate best_split(const std::vector<std::uint32_t>& rows, double total) {
        ++current_;
        for (auto r : rows) stamp_[r] = current_;
        const double n = static_cast<double>(rows.size());
        const double parent = total * total / n;
        std::vector<SplitCandidate> per_feature(columns_.size());
        parallel_for(columns_.size(), params_.jobs, [&](std::size_t f) {
            const auto& col = columns_[f];
            SplitCandidate best;
            double left_sum = 0;
            std::size_t left_n = 0;
            float prev = 0;
            for (auto r : sorted_[f]) {
                if (stamp_[r] != current_) continue;
                const float v = col[r];
                if (left_n >= params_.min_leaf && rows.size() - left_n >= params_.min_leaf && v > prev) {
                    const double right_sum = total - left_sum;
                    const double ln = static_cast<double>(left_n);
                    const double gain = left_sum * left_sum / ln + right_sum * right_sum / (n - ln) - parent;
                    if (gain > best.gain) {
                        best.gain = gain;
                        best.feature = static_cast<int>(f);
                        best.threshold = (static_cast<double>(prev) + static_cast<double>(v)) / 2;
                    }
                }
                left_sum += (*residual_)[r];
                ++left_n;
                prev = v;
            }
            per_feature[f] = best;
        });
        SplitCandidate best;
        for (const auto& c : per_feature)
            if (c.feature >= 0 && c.gain > best.gain) best = c;
        return best;
    }

    const std::vector<std::vector<float>>& columns_;
    const std::vector<std::vector<std::uint32_t>>& sorted_;
    const GbtParams& params_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t current_ = 0;
    const std::vector<double>* residual_ = nullptr;
};

} // namespace detail

/// Squared-error gradient boosting. Each tree fits the current residuals with
/// exact greedy variance-reduction splits; leaves hold the mean residual.
/// `train_mse`, when given, receives the training MSE before the first tree
/// and after every tree.
inline GbtModel gbt_train(const RegressionDataset& train, Target target, const GbtParams& params = {},
                          std::vector<double>* train_mse = nullptr) {
    params.validate();
    train.validate();
    const auto& y_in = train.target(target);
    require(!y_in.empty(), ErrorKind::Precondition, "training set is empty");
    const auto [lo, hi] = std::minmax_element(y_in.begin(), y_in.end());
    if (*lo == *hi) fail(ErrorKind::NumericError, "target " + to_string(target) + " has zero variance");

    const auto order = detail::canonical_order(train.embeddings, y_in);
    const std::size_t n = order.size(), p = train.features();
    std::vector<double> y(n);
    std::vector<std::vector<float>> columns(p, std::vector<float>(n));
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = y_in[order[i]];
        auto row = train.embeddings.row(order[i]);
        for (std::size_t f = 0; f < p; ++f) {
            require(std::isfinite(row[f]), ErrorKind::NumericError, "non-finite feature value");
            columns[f][i] = row[f];
        }
    }
    std::vector<std::vector<std::uint32_t>> sorted(p, std::vector<std::uint32_t>(n));
    for (std::size_t f = 0; f < p; ++f) {
        std::iota(sorted[f].begin(), sorted[f].end(), 0u);
        std::stable_sort(sorted[f].begin(), sorted[f].end(),
                         [&](std::uint32_t a, std::uint32_t b) { return columns[f][a] < columns[f][b]; });
    }

    GbtModel model;
    model.target = target;
    model.num_features = p;
    model.shrinkage = params.shrinkage;
    model.max_depth = params.max_depth;
    model.min_leaf = params.min_leaf;
    model.base_prediction = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

    std::vector<double> pred(n, model.base_prediction), residual(n);
    auto record = [&] {
        if (train_mse) train_mse->push_back(evalkit::mean_squared_error(y, pred));
    };
    record();
    detail::TreeBuilder builder(columns, sorted, params);
    std::vector<double> x(p);
    for (std::size_t t = 0; t < params.num_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];
        model.trees.push_back(builder.build(residual));
        const auto& tree = model.trees.back();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t f = 0; f < p; ++f) x[f] = columns[f][i];
            pred[i] += model.shrinkage * tree.predict(x);
        }
        record();
    }
    return model;
}

/// Test-set r2, MAPE and RRSE; the mean predictor always has rrse 1.
inline evalkit::MetricReport gbt_evaluate(const GbtModel& model, const RegressionDataset& test) {
    test.validate();
    require(test.features() == model.num_features, ErrorKind::Precondition,
            "model expects " + std::to_string(model.num_features) + " features, test set has " +
                std::to_string(test.features()));
    const auto yhat = model.predict(test.embeddings);
    const auto s = evalkit::regression_metrics(test.target(model.target), yhat);
    evalkit::MetricReport r;
    r.metrics = evalkit::to_json(s);
    r.metrics["mean_predictor_rrse"] = 1.0;
    r.metrics["count"] = test.size();
    r.config["target"] = to_string(model.target);
    r.config["num_trees"] = model.num_trees();
    r.config["max_depth"] = model.max_depth;
    r.config["shrinkage"] = model.shrinkage;
    r.config["min_leaf"] = model.min_leaf;
    r.config["num_features"] = model.num_features;
    return r;
}

inline constexpr int kModelSchemaVersion = 1;

inline ordered_json to_json(const GbtModel& m) {
    ordered_json j;
    j["format"] = "rtlkit-gbt";
    j["schema_version"] = kModelSchemaVersion;
    j["target"] = to_string(m.target);
    j["num_features"] = m.num_features;
    j["base_prediction"] = m.base_prediction;
    j["shrinkage"] = m.shrinkage;
    j["max_depth"] = m.max_depth;
    j["min_leaf"] = m.min_leaf;
    ordered_json trees = ordered_json::array();
    for (const auto& t : m.trees) {
        ordered_json nodes = ordered_json::array();
        for (const auto& nd : t.nodes) {
            ordered_json e;
            if (nd.is_leaf()) {
                e["value"] = nd.value;
            } else {
                e["feature"] = nd.feature;
                e["threshold"] = nd.threshold;
                e["left"] = nd.left;
                e["right"] = nd.right;
                e["value"] = nd.value;
            }
            nodes.push_back(e);
        }
        trees.push_back(nodes);
    }
    j["trees"] = trees;
    return j;
}

inline GbtModel gbt_model_from_json(const json& j) {
    try {
        require(j.value("format", "") == "rtlkit-gbt", ErrorKind::ParseError, "not a GBT model file");
        require(j.at("schema_version").get<int>() == kModelSchemaVersion, ErrorKind::ParseError,
                "unsupported model schema version");
        GbtModel m;
        m.target = target_from_string(j.at("target").get<std::string>());
        m.num_features = j.at("num_features").get<std::size_t>();
        m.base_prediction = j.at("base_prediction").get<double>();
        m.shrinkage = j.at("shrinkage").get<double>();
        m.max_depth = j.at("max_depth").get<std::size_t>();
        m.min_leaf = j.at("min_leaf").get<std::size_t>();
        for (const auto& jt : j.at("trees")) {
            RegressionTree t;
            for (const auto& e : jt) {
                TreeNode nd;
                nd.value = e.at("value").get<double>();
                if (e.contains("feature")) {
                    nd.feature = e.at("feature").get<int>();
                    nd.threshold = e.at("threshold").get<double>();
                    nd.left = e.at("left").get<std::uint32_t>();
                    nd.right = e.at("right").get<std::uint32_t>();
                    require(nd.feature >= 0 && static_cast<std::size_t>(nd.feature) < m.num_features,
                            ErrorKind::ParseError, "tree node feature out of range");
                }
                t.nodes.push_back(nd);
            }
            require(!t.nodes.empty(), ErrorKind::ParseError, "empty tree in model");
            for (std::size_t i = 0; i < t.nodes.size(); ++i) {
                const auto& nd = t.nodes[i];
                if (!nd.is_leaf())
                    require(nd.left > i && nd.right > i && nd.left < t.nodes.size() && nd.right < t.nodes.size(),
                            ErrorKind::ParseError, "tree child index invalid");
            }
            require(t.depth() <= m.max_depth, ErrorKind::ParseError, "tree deeper than max_depth");
            m.trees.push_back(std::move(t));
        }
        return m;
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, std::string("malformed model JSON: ") + e.what());
    }
}

} // namespace rtlkit::perfpred

#include "helpneed/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "helpneed/errors.hpp"
#include "helpneed/stats.hpp"

namespace helpneed {

using nlohmann::json;

Matrix Matrix::select_rows(const std::vector<std::size_t>& idx) const {
    Matrix m(idx.size(), cols);
    for (std::size_t i = 0; i < idx.size(); ++i) std::copy_n(row(idx[i]), cols, m.data.begin() + static_cast<std::ptrdiff_t>(i * cols));
    return m;
}

Matrix Matrix::select_cols(const std::vector<std::size_t>& idx) const {
    Matrix m(rows, idx.size());
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < idx.size(); ++c) m.at(r, c) = at(r, idx[c]);
    return m;
}

Normalizer Normalizer::fit(const Matrix& x) {
    Normalizer n;
    n.mean.assign(x.cols, 0.0);
    n.sd.assign(x.cols, 0.0);
    if (x.rows == 0) return n;
    for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c) n.mean[c] += x.at(r, c);
    for (auto& m : n.mean) m /= static_cast<double>(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c) n.sd[c] += std::pow(x.at(r, c) - n.mean[c], 2);
    for (auto& s : n.sd) s = std::sqrt(s / static_cast<double>(x.rows));
    return n;
}

std::vector<double> Normalizer::apply(const std::vector<double>& row) const {
    if (row.size() != mean.size()) throw ManifestMismatch("normalizer width differs from feature vector");
    std::vector<double> out(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) out[c] = sd[c] > 0 ? (row[c] - mean[c]) / sd[c] : 0.0;
    return out;
}

Matrix Normalizer::apply(const Matrix& x) const {
    if (x.cols != mean.size()) throw ManifestMismatch("normalizer width differs from matrix");
    Matrix out(x.rows, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c) out.at(r, c) = sd[c] > 0 ? (x.at(r, c) - mean[c]) / sd[c] : 0.0;
    return out;
}

ClassWeights automated_weights(const std::vector<int>& labels) {
    double n1 = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    double n = static_cast<double>(labels.size());
    double n0 = n - n1;
    if (n1 == 0 || n0 == 0) throw SingleClass("automated weights need both classes");
    return {n / (2.0 * n0), n / (2.0 * n1)};
}

double DecisionTree::predict(const double* x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].p1;
}

namespace {

struct Binned {
    std::vector<std::vector<double>> thresholds;  // per feature
    std::vector<std::uint8_t> codes;              // row-major, rows x cols
    std::size_t cols = 0;
};

Binned bin_features(const Matrix& x, int max_bins) {
    Binned b;
    b.cols = x.cols;
    b.thresholds.resize(x.cols);
    b.codes.resize(x.rows * x.cols);
    std::vector<double> col(x.rows);
    for (std::size_t c = 0; c < x.cols; ++c) {
        for (std::size_t r = 0; r < x.rows; ++r) col[r] = x.at(r, c);
        std::sort(col.begin(), col.end());
        std::vector<double> uniq;
        for (double v : col)
            if (uniq.empty() || v != uniq.back()) uniq.push_back(v);
        auto& thr = b.thresholds[c];
        if (uniq.size() <= static_cast<std::size_t>(max_bins)) {
            for (std::size_t i = 0; i + 1 < uniq.size(); ++i) thr.push_back(0.5 * (uniq[i] + uniq[i + 1]));
        } else {
            for (int k = 1; k < max_bins; ++k) {
                double q = col[static_cast<std::size_t>(static_cast<double>(k) / max_bins * static_cast<double>(col.size() - 1))];
                auto up = std::upper_bound(uniq.begin(), uniq.end(), q);
                if (up == uniq.end()) continue;
                double t = 0.5 * (q + *up);
                if (thr.empty() || t > thr.back()) thr.push_back(t);
            }
        }
        for (std::size_t r = 0; r < x.rows; ++r) {
            double v = x.at(r, c);
            b.codes[r * x.cols + c] =
                static_cast<std::uint8_t>(std::lower_bound(thr.begin(), thr.end(), v) - thr.begin());
        }
    }
    return b;
}

double gini_weighted(double w0, double w1) {
    double w = w0 + w1;
    if (w <= 0) return 0.0;
    return w - (w0 * w0 + w1 * w1) / w;  // w * gini
}

struct Builder {
    const Binned& bins;
    const std::vector<int>& y;
    const std::vector<double>& weight;
    const ForestParams& params;
    std::size_t mtry;
    std::mt19937_64& rng;
    std::vector<double>& importance;
    DecisionTree tree;
    std::vector<double> h0, h1;
    std::vector<std::size_t> feat_pool;

    int build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth) {
        double w0 = 0, w1 = 0;
        for (std::size_t i = lo; i < hi; ++i) (y[idx[i]] ? w1 : w0) += weight[idx[i]];
        int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({-1, 0.0, -1, -1, w0 + w1 > 0 ? w1 / (w0 + w1) : 0.0});
        if (depth >= params.max_depth || hi - lo < static_cast<std::size_t>(params.min_samples_split) || w0 == 0 ||
            w1 == 0)
            return id;

        const double parent = gini_weighted(w0, w1);
        double best_gain = 1e-12;
        int best_f = -1;
        std::size_t best_k = 0;
        for (std::size_t k = 0; k < mtry && k < feat_pool.size(); ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, feat_pool.size() - 1);
            std::swap(feat_pool[k], feat_pool[pick(rng)]);
            std::size_t f = feat_pool[k];
            const auto& thr = bins.thresholds[f];
            if (thr.empty()) continue;
            std::size_t nb = thr.size() + 1;
            std::fill_n(h0.begin(), nb, 0.0);
            std::fill_n(h1.begin(), nb, 0.0);
            for (std::size_t i = lo; i < hi; ++i) {
                std::size_t r = idx[i];
                (y[r] ? h1 : h0)[bins.codes[r * bins.cols + f]] += weight[r];
            }
            double l0 = 0, l1 = 0;
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                l0 += h0[b];
                l1 += h1[b];
                if (l0 + l1 <= 0 || l0 + l1 >= w0 + w1) continue;
                double gain = parent - gini_weighted(l0, l1) - gini_weighted(w0 - l0, w1 - l1);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_f = static_cast<int>(f);
                    best_k = b;
                }
            }
        }
        if (best_f < 0) return id;
        auto f = static_cast<std::size_t>(best_f);
        auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(lo), idx.begin() + static_cast<std::ptrdiff_t>(hi),
                                  [&](std::size_t r) { return bins.codes[r * bins.cols + f] <= best_k; });
        std::size_t m = static_cast<std::size_t>(mid - idx.begin());
        importance[f] += best_gain;
        tree.nodes[static_cast<std::size_t>(id)].feature = best_f;
        tree.nodes[static_cast<std::size_t>(id)].threshold = bins.thresholds[f][best_k];
        int l = build(idx, lo, m, depth + 1);
        int r = build(idx, m, hi, depth + 1);
        tree.nodes[static_cast<std::size_t>(id)].left = l;
        tree.nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    }
};

}  // namespace

RandomForest RandomForest::train(const Matrix& x, const std::vector<int>& y, const ForestParams& params,
                                 ClassWeights weights, std::uint64_t seed) {
    if (x.rows != y.size()) throw Error("label count differs from row count");
    if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0)
        throw SingleClass("forest training needs both classes");
    if (params.n_trees <= 0 || params.max_depth <= 0 || params.max_bins < 2 || params.max_bins > 255)
        throw ConfigError("invalid forest parameters");
    RandomForest forest;
    forest.n_features_ = x.cols;
    forest.importances_.assign(x.cols, 0.0);
    Binned bins = bin_features(x, params.max_bins);
    std::size_t mtry = params.features_per_split > 0
                           ? static_cast<std::size_t>(params.features_per_split)
                           : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols))));
    const std::size_t n = x.rows;
    for (int t = 0; t < params.n_trees; ++t) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(t)};
        std::mt19937_64 rng(seq);
        std::uniform_int_distribution<std::size_t> draw(0, n - 1);
        std::vector<double> w(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) w[draw(rng)] += 1.0;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i) {
            if (w[i] == 0.0) continue;
            w[i] *= y[i] ? weights.w1 : weights.w0;
            idx.push_back(i);
        }
        std::vector<double> imp(x.cols, 0.0);
        Builder b{bins, y, w, params, mtry, rng, imp, {}, std::vector<double>(256), std::vector<double>(256), {}};
        b.feat_pool.resize(x.cols);
        std::iota(b.feat_pool.begin(), b.feat_pool.end(), 0);
        b.build(idx, 0, idx.size(), 0);
        double total = std::accumulate(imp.begin(), imp.end(), 0.0);
        if (total > 0)
            for (std::size_t c = 0; c < x.cols; ++c) forest.importances_[c] += imp[c] / total;
        forest.trees_.push_back(std::move(b.tree));
    }
    double total = std::accumulate(forest.importances_.begin(), forest.importances_.end(), 0.0);
    if (total > 0)
        for (auto& v : forest.importances_) v /= total;
    return forest;
}

double RandomForest::predict_proba(const double* x) const {
    double acc = 0.0;
    for (const auto& t : trees_) acc += t.predict(x);
    return acc / static_cast<double>(trees_.size());
}

std::vector<double> RandomForest::predict_proba(const Matrix& x) const {
    if (x.cols != n_features_) throw ManifestMismatch("forest width differs from matrix");
    std::vector<double> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict_proba(x.row(r));
    return out;
}

json RandomForest::to_json() const {
    json trees = json::array();
    for (const auto& t : trees_) {
        json f = json::array(), th = json::array(), l = json::array(), r = json::array(), p = json::array();
        for (const auto& n : t.nodes) {
            f.push_back(n.feature);
            th.push_back(n.threshold);
            l.push_back(n.left);
            r.push_back(n.right);
            p.push_back(n.p1);
        }
        trees.push_back({{"feature", f}, {"threshold", th}, {"left", l}, {"right", r}, {"p1", p}});
    }
    return {{"n_features", n_features_}, {"importances", importances_}, {"trees", trees}};
}

RandomForest RandomForest::from_json(const json& j) {
    RandomForest f;
    f.n_features_ = j.at("n_features").get<std::size_t>();
    f.importances_ = j.at("importances").get<std::vector<double>>();
    for (const auto& t : j.at("trees")) {
        DecisionTree tree;
        auto fe = t.at("feature").get<std::vector<int>>();
        auto th = t.at("threshold").get<std::vector<double>>();
        auto l = t.at("left").get<std::vector<int>>();
        auto r = t.at("right").get<std::vector<int>>();
        auto p = t.at("p1").get<std::vector<double>>();
        if (th.size() != fe.size() || l.size() != fe.size() || r.size() != fe.size() || p.size() != fe.size() || fe.empty())
            throw ValidationError("model file: inconsistent tree arrays");
        for (std::size_t i = 0; i < fe.size(); ++i) {
            int n = static_cast<int>(fe.size());
            if (fe[i] >= static_cast<int>(f.n_features_) || (fe[i] >= 0 && (l[i] <= 0 || l[i] >= n || r[i] <= 0 || r[i] >= n)))
                throw ValidationError("model file: tree node out of range");
            tree.nodes.push_back({fe[i], th[i], l[i], r[i], p[i]});
        }
        f.trees_.push_back(std::move(tree));
    }
    if (f.trees_.empty()) throw ValidationError("model file: no trees");
    return f;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw Error("roc_auc: size mismatch");
    double n1 = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    double n0 = static_cast<double>(labels.size()) - n1;
    if (n1 == 0 || n0 == 0) throw SingleClass("roc_auc needs both classes");
    auto r = ranks(scores);
    double r1 = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (labels[i] == 1) r1 += r[i];
    return (r1 - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

double recall(const std::vector<int>& preds, const std::vector<int>& labels) {
    if (preds.size() != labels.size()) throw Error("recall: size mismatch");
    double tp = 0, pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1) continue;
        ++pos;
        tp += preds[i] == 1;
    }
    if (pos == 0) throw SingleClass("recall needs positive labels");
    return tp / pos;
}

}  // namespace helpneed

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace helpneed {

// Row-major design matrix with binary labels.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    Matrix select_rows(const std::vector<std::size_t>& idx) const;
    Matrix select_cols(const std::vector<std::size_t>& idx) const;
};

struct Normalizer {
    std::vector<double> mean;
    std::vector<double> sd;

    static Normalizer fit(const Matrix& x);
    Matrix apply(const Matrix& x) const;
    std::vector<double> apply(const std::vector<double>& row) const;
};

struct ClassWeights {
    double w0 = 1.0;
    double w1 = 1.0;
};

// Balanced weights w_c = n / (2 n_c).
ClassWeights automated_weights(const std::vector<int>& labels);

struct ForestParams {
    int n_trees = 100;
    int max_depth = 12;
    int min_samples_split = 2;
    int max_bins = 32;
    int features_per_split = 0;  // 0 means ceil(sqrt(d))
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double p1 = 0.0;  // weighted class-1 share at the node
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    double predict(const double* x) const;
};

class RandomForest {
public:
    static RandomForest train(const Matrix& x, const std::vector<int>& y, const ForestParams& params,
                              ClassWeights weights, std::uint64_t seed);

    double predict_proba(const double* x) const;
    double predict_proba(const std::vector<double>& x) const { return predict_proba(x.data()); }
    std::vector<double> predict_proba(const Matrix& x) const;
    // Mean decrease in impurity, normalized to sum to 1.
    const std::vector<double>& importances() const { return importances_; }
    std::size_t n_features() const { return n_features_; }
    const std::vector<DecisionTree>& trees() const { return trees_; }

    nlohmann::json to_json() const;
    static RandomForest from_json(const nlohmann::json& j);

private:
    std::vector<DecisionTree> trees_;
    std::vector<double> importances_;
    std::size_t n_features_ = 0;
};

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);
double recall(const std::vector<int>& preds, const std::vector<int>& labels);

}  // namespace helpneed

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "helpneed/features.hpp"
#include "helpneed/forest.hpp"

namespace helpneed {

enum class Variant { StateBased, StateFree };
const char* to_string(Variant v);

struct Dataset {
    std::vector<std::string> features;  // column names
    Matrix x;
    std::vector<int> y;
    std::vector<std::string> groups;  // student per row
    std::vector<std::string> tags;    // corpus tag per row (semester split)
};

// State-based: rows whose state matched, all 62 features. State-free: every
// row with the quality features removed.
Dataset make_dataset(const std::vector<StepSample>& samples, Variant variant,
                     const std::map<std::string, std::string>& student_tags = {});

std::string dataset_csv(const Dataset& d);

struct PredictorParams {
    ForestParams forest;
    std::size_t min_selected = 5;
    int k_folds = 10;
    std::vector<double> grid{1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0};
    double auc_slack = 0.02;
};

nlohmann::json to_json(const PredictorParams& p);
PredictorParams predictor_params_from_json(const nlohmann::json& j);

// Indices of features whose importance is at least the mean, at least
// `min_keep` of them, in original order.
std::vector<std::size_t> select_by_importance(const std::vector<double>& importances, std::size_t min_keep);

struct Selection {
    Normalizer normalizer;               // fitted on all columns of the training data
    std::vector<std::size_t> selected;   // column indices
    ClassWeights automated;
};

Selection select_features(const Dataset& train, const PredictorParams& params, std::uint64_t seed);

struct HelpNeedModel {
    Variant variant = Variant::StateFree;
    std::vector<std::string> manifest;  // expected input columns
    std::vector<std::size_t> selected;
    Normalizer normalizer;              // over selected columns
    RandomForest forest;
    ClassWeights weights;
    double multiplier = 1.0;
    std::uint64_t seed = 0;

    // Input is a full row in manifest order.
    double predict_proba(const std::vector<double>& row) const;
    int predict(const std::vector<double>& row) const { return predict_proba(row) >= 0.5 ? 1 : 0; }
};

// Fits normalizer, selection and forest with w1 = multiplier * automated w1.
HelpNeedModel train_model(const Dataset& train, Variant variant, const PredictorParams& params, double multiplier,
                          std::uint64_t seed);
HelpNeedModel train_with_selection(const Dataset& train, const Selection& sel, Variant variant,
                                   const PredictorParams& params, double multiplier, std::uint64_t seed);

nlohmann::json to_json(const HelpNeedModel& m);
HelpNeedModel model_from_json(const nlohmann::json& j);
void save_model(const HelpNeedModel& m, const std::string& path);
HelpNeedModel load_model(const std::string& path);

struct PredictorPair {
    HelpNeedModel state_based;
    HelpNeedModel state_free;
};

struct StepPrediction {
    int label = 0;
    double probability = 0.0;
    Variant used = Variant::StateFree;
};

// `row` is the full 62-feature vector from the extractor.
StepPrediction predict_step(const PredictorPair& models, const std::vector<double>& row, bool state_known);

struct FoldResult {
    double recall = 0.0;
    double auc = 0.0;  // NaN if the test fold holds one class
    std::size_t n_test = 0;
    std::size_t positives = 0;
};

struct CVReport {
    Variant variant = Variant::StateFree;
    double multiplier = 1.0;
    std::vector<FoldResult> folds;
    double mean_recall = 0.0;
    double mean_auc = 0.0;
    std::map<std::string, int> fold_of_group;
    std::size_t leakage_violations = 0;
};

nlohmann::json to_json(const CVReport& r);

// Group-level folds stratified by each group's positive-label rate.
std::map<std::string, int> assign_folds(const Dataset& d, int k, std::uint64_t seed);
// One fold per distinct tag.
std::map<std::string, int> assign_folds_by_tag(const Dataset& d);

// Evaluates every multiplier on the same folds; selection and normalization
// are fit inside each training fold once and shared across multipliers.
std::vector<CVReport> cross_validate(const Dataset& d, Variant variant, const PredictorParams& params,
                                     const std::vector<double>& multipliers, std::uint64_t seed,
                                     const std::map<std::string, int>& folds);
CVReport cross_validate(const Dataset& d, Variant variant, const PredictorParams& params, double multiplier,
                        std::uint64_t seed);

struct ExpertSearchResult {
    double multiplier = 1.0;
    ClassWeights weights;  // on the full data
    std::vector<CVReport> reports;
    std::size_t chosen = 0;
};

ExpertSearchResult choose_expert(const std::vector<CVReport>& reports, const std::vector<double>& grid,
                                 ClassWeights automated, double auc_slack);
ExpertSearchResult expert_weight_search(const Dataset& d, Variant variant, const PredictorParams& params,
                                        std::uint64_t seed);

}  // namespace helpneed

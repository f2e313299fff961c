#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "helpneed/experiment.hpp"

namespace helpneed {

struct PipelinePaths {
    std::string problems;  // empty: built-in curriculum
    std::string logs = "work/logs";
    std::string networks = "work/networks";
    std::string models = "work/models";
    std::string reports = "work/reports";
};

struct PipelineConfig {
    PipelinePaths paths;
    RewardConfig reward;
    EfficiencyMetric metric = EfficiencyMetric::GlobalAbsolute;
    PredictorParams predictor;
    PolicyConfig policy{PolicyMode::Adaptive, 0.0, 3};  // treatment condition
    PopulationSpec historical{120, {0.3, 0.95}, {0.5, 0.9}, {0.1, 0.5}, 0.25, {"f18", "s19"}, "h"};
    ExperimentConfig experiment;
    double session_gap_s = 1800.0;
    std::uint64_t seed = 20240601;
};

// Rejects unknown keys at every level.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& c);  // every value, defaults included
PipelineConfig load_pipeline_config(const std::string& path);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
std::uint64_t fnv1a64(const std::string& bytes);

ProblemSet pipeline_problems(const PipelineConfig& c);

// Corpus of a Control-condition population with no tutor knowledge.
SimOutput generate_historical(const ProblemSet& problems, const PopulationSpec& spec, const SimConfig& sim,
                              std::uint64_t seed);

TutorKnowledge build_knowledge(const ProblemSet& problems, const std::vector<AttemptLog>& attempts,
                               const RewardConfig& reward, EfficiencyMetric metric, double session_gap_s);

// Training-phase samples labelled with the knowledge's metric.
std::vector<StepSample> training_samples(const TutorKnowledge& tk, const std::vector<AttemptLog>& attempts);

std::map<std::string, std::string> student_tags(const std::vector<SimStudent>& students);

// Stages. Each reads and writes only the files named in its comment and
// records content hashes in <reports>/stages.json.
void stage_gen(const PipelineConfig& c);        // -> logs/historical.jsonl, logs/students.json, logs/problems.json
void stage_ingest(const PipelineConfig& c);     // logs -> reports/ingest.json
void stage_build(const PipelineConfig& c);      // logs -> networks/<pid>.json
void stage_solve(const PipelineConfig& c);      // networks -> networks/<pid>.quality.csv
void solve_one(const RewardConfig& reward, const std::string& network_path, const std::string& out_path);
void stage_classify(const PipelineConfig& c);   // logs, quality -> reports/classified.csv, reports/durations.json
void stage_correlate(const PipelineConfig& c);  // logs, quality -> reports/correlation.json
void stage_train(const PipelineConfig& c);      // logs, quality [, reports/cv_*.json] -> models/*.json
void stage_cv(const PipelineConfig& c);         // logs, quality -> reports/cv_state_based.json, cv_state_free.json
void stage_predict(const PipelineConfig& c);    // logs, quality, models -> reports/predictions.csv
void stage_simulate(const PipelineConfig& c);   // logs, quality, models -> reports/experiment.json + CSV tables
void stage_report(const PipelineConfig& c);     // reports -> reports/summary.json

// Three-trajectory and goal-reward checks; prints one line per check.
bool fixture_check(std::ostream& out);

}  // namespace helpneed

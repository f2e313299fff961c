#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "helpneed/simulate.hpp"
#include "helpneed/stats.hpp"

namespace helpneed {

// Index = pred * 4 + hinted * 2 + observed, each 0 (OK / noHints) or 1.
using EightWay = std::array<long, 8>;
std::size_t eight_way_index(bool pred_hn, bool hinted, bool observed_hn);
std::string eight_way_label(std::size_t index);

struct StepObservation {
    bool predicted_hn = false;
    bool observed_hn = false;
    bool hinted = false;     // any hint received inside the step
    bool requested = false;  // any on-demand request inside the step
};

struct StudentHelpBehavior {
    std::string student;
    long steps = 0;
    double possible_help_avoidance = 0.0;
    double possible_help_abuse = 0.0;
    double possible_help_appropriateness = 0.0;
    long proactive_hints = 0;
    long on_demand_hints = 0;
    long hints_justified = 0;
    std::optional<double> hjr;
    long hint_requests = 0;
    long too_quick_requests = 0;
    double hinted_proportion = 0.0;
    EightWay eight{};
};

struct HelpBehaviorReport {
    std::vector<StudentHelpBehavior> students;
    EightWay eight{};
    long state_changing_steps = 0;
};

StudentHelpBehavior summarize_steps(const std::string& student, const std::vector<StepObservation>& steps);

// Training-phase attempts only; annotations supply the step-start predictions
// (missing annotations count as predicted OK).
HelpBehaviorReport evaluate_help_behavior(const std::vector<AttemptLog>& attempts,
                                          const std::vector<StepAnnotation>& annotations,
                                          const ProblemSet& problems, const QualityTables& quality,
                                          const DurationModel& durations, EfficiencyMetric metric,
                                          double too_quick_s = 17.0);

nlohmann::json to_json(const HelpBehaviorReport& r);

// Everything the tutor learned from the historical corpus.
struct TutorKnowledge {
    const ProblemSet* problems = nullptr;
    std::map<std::string, InteractionNetwork> networks;
    QualityTables quality;
    DurationModel durations;
    std::map<std::string, std::pair<double, double>> quartiles;  // completed step counts, Q1/Q3
    EfficiencyMetric metric = EfficiencyMetric::GlobalAbsolute;
    std::optional<PredictorPair> predictor;
    double session_gap_s = 1800.0;
};

std::map<std::string, std::pair<double, double>> step_quartiles(const std::vector<AttemptLog>& attempts);

struct ExperimentConfig {
    PopulationSpec population;
    SimConfig sim;
    PolicyConfig adaptive{PolicyMode::Adaptive, 0.0, 3};
    PolicyConfig control{PolicyMode::Control, 0.0, 3};
    double too_quick_s = 17.0;
};

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct StudentOutcome {
    std::string student;
    std::string tag;
    double post_optimality = 0.0;  // mean over posttest problems, 0 for unsolved
    double post_time_min = 0.0;    // capped time
    std::optional<double> post_accuracy;
    std::array<long, 5> classes{};  // training steps per StepClass
};

struct ConditionReport {
    std::string name;
    PolicyConfig policy;
    std::vector<StudentOutcome> students;
    HelpBehaviorReport behavior;
    std::array<long, 5> class_totals{};
    SimOutput output;
};

struct Comparison {
    std::string measure;
    double mean_a = 0.0;
    double mean_b = 0.0;
    MannWhitneyResult mann_whitney;
    WelchResult welch;
};

// Zero-effect results when both samples are constant and equal.
Comparison compare(const std::string& measure, const std::vector<double>& a, const std::vector<double>& b);

struct ExperimentReport {
    ConditionReport a;  // first condition (Adaptive by default)
    ConditionReport b;
    std::vector<Comparison> comparisons;
    std::uint64_t seed = 0;
};

ConditionReport run_condition(const std::string& name, const PolicyConfig& policy, const TutorKnowledge& tk,
                              const ExperimentConfig& cfg, std::uint64_t seed);
ExperimentReport run_experiment(const TutorKnowledge& tk, const ExperimentConfig& cfg, std::uint64_t seed);

nlohmann::json to_json(const ExperimentReport& r);
std::string step_class_csv(const ExperimentReport& r);  // class totals per condition with U, z, p
std::string hint_csv(const ExperimentReport& r);        // hint counts and justification rate
std::string eight_way_csv(const ExperimentReport& r);   // one row per condition and category
std::string histogram_csv(const ExperimentReport& r);   // per-student hinted proportion, quick requests

}  // namespace helpneed

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "helpneed/log.hpp"
#include "helpneed/quality.hpp"

namespace helpneed {

enum class EfficiencyMetric { GlobalAbsolute, GlobalRelative, LocalAbsolute, LocalRelative };
enum class StepClass { Expert, Strategic, Opportunistic, FarOff, Futile };

const char* to_string(EfficiencyMetric m);
EfficiencyMetric metric_from_string(const std::string& s);
const char* to_string(StepClass c);
inline bool helpneed(StepClass c) { return c == StepClass::FarOff || c == StepClass::Futile; }
inline int label_step(StepClass c) { return helpneed(c) ? 1 : 0; }

enum class DurationEstimator { PerStep, PerAttemptMean };

struct DurationModel {
    std::map<std::string, double> p75_seconds;

    double threshold(const std::string& problem_id) const;
    bool is_long(const std::string& problem_id, double duration_s) const {
        return duration_s > threshold(problem_id);
    }
};

// 75th percentile (inclusive linear interpolation); needs at least 4 values.
double duration_threshold(const std::vector<double>& durations);
DurationModel fit_duration_model(const std::vector<AttemptLog>& attempts,
                                 DurationEstimator estimator = DurationEstimator::PerStep);

double progress(EfficiencyMetric metric, const QualityTable& q, const std::string& start_key,
                const std::string& pre_key, const std::string& post_key);
inline bool is_efficient(EfficiencyMetric, double progress_value) { return progress_value >= 0.0; }

struct ClassifiedStep {
    std::size_t group = 0;  // index into step_groups(attempt)
    int seq_no = 0;
    StepClass cls = StepClass::Expert;
    bool state_known = true;
    double metric_value = 0.0;  // NaN when the state is unknown
    double duration_s = 0.0;
    bool is_long = false;
};

// Pure sequencing rule over (is_long, is_efficient) pairs.
std::vector<StepClass> classify_sequence(const std::vector<std::pair<bool, bool>>& long_and_efficient);

std::vector<ClassifiedStep> classify_attempt(const AttemptLog& attempt, const QualityTable& q,
                                             const DurationModel& dur, EfficiencyMetric metric);

struct QualityTables {
    std::map<std::string, QualityTable> by_problem;
    const QualityTable* find(const std::string& problem_id) const;
};

std::string classified_csv_header();
std::string classified_csv_rows(const AttemptLog& attempt, const std::vector<ClassifiedStep>& steps);

double optimality(double steps, double q1, double q3);
double capped_time(const std::vector<double>& durations_s);
std::optional<double> accuracy(long right_apps, long wrong_apps);
std::optional<double> hjr(long hints_given, long hints_justified);

}  // namespace helpneed

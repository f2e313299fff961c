#pragma once

#include <map>
#include <string>
#include <vector>

#include "helpneed/log.hpp"
#include "helpneed/problem.hpp"
#include "helpneed/quality.hpp"
#include "helpneed/stepclass.hpp"

namespace helpneed {

inline constexpr std::size_t kQualityFeatureCount = 8;

// Full manifest: 8 quality features followed by 54 counters.
const std::vector<std::string>& feature_names();
std::size_t feature_index(const std::string& name);
bool is_quality_feature(std::size_t index);

struct FeatureRow {
    std::vector<double> values;  // manifest order
    bool state_known = false;
};

// Incremental extractor for one student's chronological event stream.
// features() reads only events observed so far, so calling it before a
// step's records are observed gives the step-start view.
class FeatureTracker {
public:
    explicit FeatureTracker(double session_gap_s = 1800.0) : session_gap_s_(session_gap_s) {}

    void begin_attempt(const std::string& problem_id, Difficulty difficulty, double first_record_start_ts);
    void observe(const StepRecord& r);
    void end_attempt(bool completed);

    // cur = state at step start, prev = state before the previous step.
    FeatureRow features(const QualityTable* q, const std::string& start_key, const std::string& prev_key,
                        const std::string& cur_key, std::size_t current_statements) const;

private:
    struct Counters {
        double time = 0, steps = 0, actions = 0, hint_requests = 0, proactive = 0, on_demand = 0;
        double deleted = 0, right = 0, wrong = 0;
    };

    double session_gap_s_;
    Counters t_, p_, s_, pending_;
    std::string problem_;
    bool have_problem_ = false;
    bool last_attempt_completed_ = true;
    bool new_session_problem_ = false;
    double last_ts_ = 0.0;
    bool any_event_ = false;
    double sessions_before_ = 0, skips_ = 0, restarts_ = 0, easy_ = 0, hard_ = 0;
    Difficulty difficulty_ = Difficulty::Easy;
};

struct StepSample {
    std::string student;
    std::string problem;
    int attempt = 0;
    int seq_no = 0;
    std::size_t group = 0;
    FeatureRow row;
    StepClass cls = StepClass::Expert;
    int label = 0;
};

struct ExtractionContext {
    const ProblemSet* problems = nullptr;
    const QualityTables* quality = nullptr;
    const DurationModel* durations = nullptr;
    EfficiencyMetric metric = EfficiencyMetric::GlobalAbsolute;
    double session_gap_s = 1800.0;
};

// Attempts of one student in chronological order.
std::vector<StepSample> extract_student(const std::vector<const AttemptLog*>& attempts, const ExtractionContext& ctx);
// Groups by student (order of first appearance) and extracts every step.
std::vector<StepSample> extract_corpus(const std::vector<AttemptLog>& attempts, const ExtractionContext& ctx);

}  // namespace helpneed

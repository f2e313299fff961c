#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "helpneed/logic.hpp"
#include "helpneed/problem.hpp"

namespace helpneed {

enum class ActionKind { Derive, Delete, HintRequest, HintGiven, HintJustify };
enum class HintKind { Proactive, OnDemand };

struct Action {
    ActionKind kind = ActionKind::Derive;
    std::optional<Rule> rule;
    std::vector<std::size_t> premises;  // statement indices in the pre-state
    std::string derived;                // derived text, deleted text, or hint text
    std::optional<HintKind> hint_kind;

    bool changes_state() const { return kind == ActionKind::Derive || kind == ActionKind::Delete; }
    bool is_hint_event() const { return !changes_state(); }
};

const char* to_string(ActionKind k);
const char* to_string(HintKind k);

struct StepRecord {
    std::string student_id;
    std::string problem_id;
    int attempt = 0;
    int seq_no = 0;
    std::vector<std::string> pre_state;
    std::vector<std::string> post_state;
    std::string pre_key;
    std::string post_key;
    Action action;
    double duration_s = 0.0;
    int wrong_app_count = 0;
    double timestamp = 0.0;
};

struct AttemptLog {
    std::string student_id;
    std::string problem_id;
    int attempt = 0;
    std::vector<StepRecord> records;
    bool completed = false;
    std::string conclusion;

    std::string start_key() const;
    std::string final_key() const;
    std::size_t state_changing_count() const;
};

// One state-changing step together with the hint events that preceded it
// inside the same step and the justify marker that may follow it.
struct StepGroup {
    std::size_t first_record = 0;   // first record belonging to the step
    std::size_t change_record = 0;  // the DERIVE or DELETE record
    std::size_t last_record = 0;    // change_record or its trailing HINT_JUSTIFY
    std::string pre_key;
    std::string post_key;
    double duration_s = 0.0;
    int wrong_apps = 0;
    int hint_requests = 0;
    int proactive_hints = 0;
    int on_demand_hints = 0;
    bool justified = false;
    double first_request_elapsed_s = -1.0;  // time into the step of the first on-demand request

    bool hinted() const { return proactive_hints + on_demand_hints > 0; }
};

// Groups attempt records into state-changing steps. Hint events after the
// last state-changing step (an abandoned tail) are not part of any step.
std::vector<StepGroup> step_groups(const AttemptLog& attempt);

nlohmann::json to_json(const StepRecord& r);
std::string to_jsonl(const StepRecord& r);
void write_jsonl(std::ostream& out, const std::vector<AttemptLog>& attempts);

// Reads a JSONL stream. Problem catalog supplies givens and conclusions.
std::vector<AttemptLog> ingest_attempts(std::istream& in, const ProblemSet& problems);
std::vector<AttemptLog> ingest_file(const std::string& path, const ProblemSet& problems);

}  // namespace helpneed

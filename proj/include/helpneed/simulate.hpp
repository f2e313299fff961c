#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "helpneed/log.hpp"
#include "helpneed/policy.hpp"
#include "helpneed/predictor.hpp"
#include "helpneed/problem.hpp"
#include "helpneed/search.hpp"
#include "helpneed/stepclass.hpp"

namespace helpneed {

struct SimStudent {
    std::string id;
    double skill = 0.5;        // sigma
    double hint_follow = 0.5;  // rho
    double help_seek = 0.2;    // eta
    double speed = 1.0;        // multiplies step times
    std::uint64_t seed = 0;
    std::string tag;
};

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

struct PopulationSpec {
    int n_students = 40;
    Range skill{0.3, 0.95};
    Range hint_follow{0.5, 0.9};
    Range help_seek{0.1, 0.5};
    double speed_sigma = 0.25;
    std::vector<std::string> tags{"f18", "s19"};  // assigned round-robin
    std::string id_prefix = "s";
};

nlohmann::json to_json(const PopulationSpec& p);
PopulationSpec population_spec_from_json(const nlohmann::json& j);

struct SimConfig {
    double easy_step_s = 25.0;
    double hard_step_s = 45.0;
    double time_sigma = 0.45;
    double confused_time_factor = 2.0;
    double hint_time_factor = 0.6;
    double cap_factor = 2.5;
    int cap_extra = 4;
    double restart_prob = 0.35;
    int max_attempts = 2;
    double session_break_prob = 0.2;
    double session_break_s = 3 * 3600.0;
    double delete_prob = 0.3;
    double confusion_penalty = 0.5;  // skill multiplier after an unproductive step
    double wrong_app_rate = 0.6;
    int hint_ttl = 2;
};

nlohmann::json to_json(const SimConfig& c);
SimConfig sim_config_from_json(const nlohmann::json& j);

std::vector<SimStudent> draw_population(const PopulationSpec& spec, std::uint64_t seed);

// Historical knowledge available to the tutor while simulating.
struct TutorContext {
    const ProblemSet* problems = nullptr;
    const std::map<std::string, InteractionNetwork>* networks = nullptr;
    const QualityTables* quality = nullptr;
    const PredictorPair* predictor = nullptr;
    double session_gap_s = 1800.0;
};

struct StepAnnotation {
    std::string student;
    std::string problem;
    int attempt = 0;
    std::size_t group = 0;
    int predicted = -1;  // -1 when no prediction was made
    double probability = 0.0;
    bool state_known = false;
};

struct SimOutput {
    std::vector<SimStudent> students;
    std::vector<AttemptLog> attempts;      // chronological per student
    std::vector<StepAnnotation> annotations;  // training-phase steps
};

class Simulator {
public:
    Simulator(const ProblemSet& problems, SimConfig cfg);

    SimOutput run(const std::vector<SimStudent>& students, const PolicyConfig& policy, const TutorContext& tutor) const;
    std::vector<AttemptLog> run_student(const SimStudent& s, const PolicyConfig& policy, const TutorContext& tutor,
                                        std::vector<StepAnnotation>* annotations) const;

    const ShortestCompletion& solver(const std::string& problem_id) const { return *solvers_.at(problem_id); }

private:
    const ProblemSet& problems_;
    SimConfig cfg_;
    std::map<std::string, std::shared_ptr<ShortestCompletion>> solvers_;
};

SimOutput simulate_population(const ProblemSet& problems, const PopulationSpec& spec, const SimConfig& cfg,
                              const PolicyConfig& policy, const TutorContext& tutor, std::uint64_t seed);

}  // namespace helpneed

#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "helpneed/logic.hpp"

namespace helpneed {

enum class Difficulty { Easy, Hard };
enum class Phase { Pretest, Training, Posttest };

struct Problem {
    std::string id;
    std::vector<std::string> givens;  // canonical
    std::string conclusion;           // canonical
    Difficulty difficulty = Difficulty::Easy;
    Phase phase = Phase::Training;

    ProofState start() const { return ProofState(id, givens, conclusion); }
    std::vector<char> atoms() const { return problem_atoms(givens, conclusion); }
};

const char* to_string(Difficulty d);
const char* to_string(Phase p);

class ProblemSet {
public:
    ProblemSet() = default;
    explicit ProblemSet(std::vector<Problem> problems);

    const std::vector<Problem>& problems() const { return problems_; }
    const Problem& at(const std::string& id) const;
    bool contains(const std::string& id) const { return index_.count(id) != 0; }
    std::vector<const Problem*> in_phase(Phase p) const;

private:
    std::vector<Problem> problems_;
    std::map<std::string, std::size_t> index_;
};

nlohmann::json to_json(const ProblemSet& set);
ProblemSet problem_set_from_json(const nlohmann::json& j);
ProblemSet load_problem_set(const std::string& path);
void save_problem_set(const ProblemSet& set, const std::string& path);

// Built-in curriculum used by the generator and the in-silico experiment:
// two pretest problems, eight training problems, three posttest problems.
ProblemSet default_curriculum();

}  // namespace helpneed

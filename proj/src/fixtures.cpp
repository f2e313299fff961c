#include "helpneed/fixtures.hpp"

#include "helpneed/errors.hpp"

namespace helpneed::fixtures {

AttemptLog scripted_attempt(const Problem& problem, const std::string& student, int attempt,
                            const std::vector<std::string>& path, double step_seconds, double start_ts) {
    AttemptLog log{student, problem.id, attempt, {}, false, problem.conclusion};
    ProofState state = problem.start();
    const auto atoms = problem.atoms();
    double ts = start_ts;
    int seq = 0;
    for (const auto& entry : path) {
        StepRecord r;
        r.student_id = student;
        r.problem_id = problem.id;
        r.attempt = attempt;
        r.seq_no = seq++;
        r.pre_state = state.statements();
        r.pre_key = state_key(state);
        r.duration_s = step_seconds;
        ts += step_seconds;
        r.timestamp = ts;
        if (!entry.empty() && entry[0] == '-') {
            std::string target = normalize(entry.substr(1));
            auto idx = state.index_of(target);
            if (!idx) throw Error("scripted delete of absent statement " + target);
            r.action.kind = ActionKind::Delete;
            r.action.premises = {*idx};
            r.action.derived = target;
            state = state.without(*idx);
        } else {
            std::string target = normalize(entry);
            const Derivation* found = nullptr;
            auto ders = legal_derivations(state, {kAllRules.begin(), kAllRules.end()}, atoms);
            for (const auto& d : ders)
                if (d.derived == target) {
                    found = &d;
                    break;
                }
            if (!found) throw Error("scripted step not derivable: " + target);
            r.action.kind = ActionKind::Derive;
            r.action.rule = found->rule;
            r.action.premises = found->premises;
            r.action.derived = target;
            state = state.with_derived(parse(target));
        }
        r.post_state = state.statements();
        r.post_key = state_key(state);
        log.records.push_back(std::move(r));
    }
    log.completed = is_goal(state);
    return log;
}

Problem fig3_problem() {
    return Problem{"P-fig3", {"A&B", "A->C", "C->E", "E->F", "(A->E)->D", "D->E"}, "F", Difficulty::Hard,
                   Phase::Training};
}

namespace {

const std::vector<std::string> kShort{"A->E", "A", "E", "F"};
const std::vector<std::string> kMedium{"A->E", "D", "A", "E", "F"};
const std::vector<std::string> kLong{"B", "C->F", "B|E", "A", "C", "E", "A->E", "F"};

struct Family {
    std::vector<std::string> path;
    int count;
};

// Counts were chosen so every published efficiency relation holds with a
// margin of at least 0.75 quality units.
const std::vector<Family> kFamilies{
    {kShort, 1},
    {kMedium, 1},
    {kLong, 4},
    {{"B", "A", "C", "E", "F"}, 1},
    {{"B", "C->F", "A", "C", "F"}, 4},
    {{"B", "C->F", "B|E", "-B|E", "A", "C", "F"}, 2},
    {{"A->E", "D", "D|A"}, 1},
    {{"B", "C->F", "B|E", "A", "C", "E", "E|C"}, 5},
    {{"C->F", "A", "C", "E", "A->E", "A->F", "D", "F"}, 7},
    {{"A->E", "D", "E", "F"}, 1},
};

std::vector<DesignatedStep> label_steps(const AttemptLog& a, const std::string& name) {
    std::vector<DesignatedStep> out;
    for (std::size_t i = 0; i < a.records.size(); ++i)
        out.push_back({name + "-" + std::to_string(i + 1), a.records[i].pre_key, a.records[i].post_key});
    return out;
}

}  // namespace

ThreeTrajectory three_trajectory() {
    ThreeTrajectory f;
    f.problem = fig3_problem();
    int n = 0;
    for (const auto& fam : kFamilies)
        for (int k = 0; k < fam.count; ++k) {
            f.attempts.push_back(scripted_attempt(f.problem, "fx" + std::to_string(n), 0, fam.path, 20.0, 1000.0 * n));
            ++n;
        }
    f.start_key = f.attempts.front().start_key();
    for (auto [path, name] : {std::pair{&kShort, "T_short"}, {&kMedium, "T_medium"}, {&kLong, "T_long"}}) {
        auto steps = label_steps(scripted_attempt(f.problem, "probe", 0, *path), name);
        f.steps.insert(f.steps.end(), steps.begin(), steps.end());
    }
    return f;
}

std::vector<AttemptLog> goal_length_corpus() {
    Problem p = fig3_problem();
    std::vector<AttemptLog> out;
    out.push_back(scripted_attempt(p, "g0", 0, kShort));
    out.push_back(scripted_attempt(p, "g1", 0, kMedium));
    for (int i = 2; i < 5; ++i) out.push_back(scripted_attempt(p, "g" + std::to_string(i), 0, kLong));
    return out;
}

Problem chain_problem() { return Problem{"chain", {"A", "A->B", "B->C"}, "C", Difficulty::Easy, Phase::Training}; }

std::vector<AttemptLog> chain_corpus() { return {scripted_attempt(chain_problem(), "c0", 0, {"B", "C"})}; }

std::vector<AttemptLog> branch_corpus() {
    Problem p = chain_problem();
    return {scripted_attempt(p, "b0", 0, {"B", "C"}), scripted_attempt(p, "b1", 0, {"A|C"})};
}

std::vector<AttemptLog> cycle_corpus() {
    Problem p = chain_problem();
    return {scripted_attempt(p, "y0", 0, {"B", "-B", "B", "C"}), scripted_attempt(p, "y1", 0, {"A->C", "C"}),
            scripted_attempt(p, "y2", 0, {"A|B", "B", "-A|B", "C"}), scripted_attempt(p, "y3", 0, {"A->C", "-A->C"})};
}

std::vector<NamedNetwork> fixture_networks() {
    std::vector<NamedNetwork> out;
    out.push_back({"chain", build_network(chain_corpus(), "chain")});
    out.push_back({"branch", build_network(branch_corpus(), "chain")});
    out.push_back({"cycle", build_network(cycle_corpus(), "chain")});
    out.push_back({"goal_lengths", build_network(goal_length_corpus(), "P-fig3")});
    out.push_back({"three_trajectory", build_network(three_trajectory().attempts, "P-fig3")});
    return out;
}

}  // namespace helpneed::fixtures

#include "helpneed/problem.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "helpneed/errors.hpp"

namespace helpneed {

using nlohmann::json;

const char* to_string(Difficulty d) { return d == Difficulty::Easy ? "easy" : "hard"; }

const char* to_string(Phase p) {
    switch (p) {
        case Phase::Pretest: return "pretest";
        case Phase::Training: return "training";
        case Phase::Posttest: return "posttest";
    }
    return "?";
}

ProblemSet::ProblemSet(std::vector<Problem> problems) : problems_(std::move(problems)) {
    for (std::size_t i = 0; i < problems_.size(); ++i) {
        auto& p = problems_[i];
        for (auto& g : p.givens) g = normalize(g);
        p.conclusion = normalize(p.conclusion);
        if (!index_.emplace(p.id, i).second) throw ValidationError("duplicate problem id: " + p.id);
    }
}

const Problem& ProblemSet::at(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ValidationError("unknown problem: " + id);
    return problems_[it->second];
}

std::vector<const Problem*> ProblemSet::in_phase(Phase p) const {
    std::vector<const Problem*> out;
    for (const auto& pr : problems_)
        if (pr.phase == p) out.push_back(&pr);
    return out;
}

json to_json(const ProblemSet& set) {
    json arr = json::array();
    for (const auto& p : set.problems()) {
        arr.push_back({{"id", p.id},
                       {"givens", p.givens},
                       {"conclusion", p.conclusion},
                       {"difficulty", to_string(p.difficulty)},
                       {"phase", to_string(p.phase)}});
    }
    return {{"problems", arr}};
}

ProblemSet problem_set_from_json(const json& j) {
    if (!j.is_object() || !j.contains("problems") || !j["problems"].is_array())
        throw ValidationError("problem catalog must be an object with a 'problems' array");
    std::vector<Problem> out;
    for (const auto& e : j["problems"]) {
        Problem p;
        try {
            p.id = e.at("id").get<std::string>();
            p.givens = e.at("givens").get<std::vector<std::string>>();
            p.conclusion = e.at("conclusion").get<std::string>();
            std::string d = e.value("difficulty", "easy");
            std::string ph = e.value("phase", "training");
            if (d != "easy" && d != "hard") throw ValidationError("difficulty must be easy or hard");
            p.difficulty = d == "easy" ? Difficulty::Easy : Difficulty::Hard;
            if (ph == "pretest") p.phase = Phase::Pretest;
            else if (ph == "training") p.phase = Phase::Training;
            else if (ph == "posttest") p.phase = Phase::Posttest;
            else throw ValidationError("phase must be pretest, training or posttest");
        } catch (const json::exception& ex) {
            throw ValidationError(std::string("problem catalog entry: ") + ex.what());
        }
        out.push_back(std::move(p));
    }
    return ProblemSet(std::move(out));
}

ProblemSet load_problem_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open problem catalog: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw ValidationError(path + ": " + ex.what());
    }
    return problem_set_from_json(j);
}

void save_problem_set(const ProblemSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << to_json(set).dump(1) << '\n';
}

ProblemSet default_curriculum() {
    using D = Difficulty;
    using P = Phase;
    return ProblemSet({
        {"pre1", {"A->B", "B->C", "A"}, "C", D::Easy, P::Pretest},
        {"pre2", {"A&B", "B->C", "C->D"}, "D", D::Easy, P::Pretest},
        {"P-fig3", {"A&B", "A->C", "C->E", "E->F", "(A->E)->D", "D->E"}, "F", D::Hard, P::Training},
        {"t1", {"A|B", "~A", "B->C"}, "C", D::Easy, P::Training},
        {"t2", {"A->B", "~B", "C|A"}, "C", D::Easy, P::Training},
        {"t3", {"A&B", "A->C", "B->D", "C&D->E"}, "E", D::Hard, P::Training},
        {"t4", {"A->B", "B->C", "C->D", "A"}, "D", D::Easy, P::Training},
        {"t5", {"A|B", "A->C", "~C", "B->D", "D->E"}, "E", D::Hard, P::Training},
        {"t6", {"A", "A|B->C", "C->D", "D->E"}, "E", D::Hard, P::Training},
        {"t7", {"A&B", "B->C", "C->D", "D->E"}, "E", D::Easy, P::Training},
        {"post1", {"A&B", "A->C", "B->D", "C&D->E", "E->F"}, "F", D::Hard, P::Posttest},
        {"post2", {"A|B", "~A", "B->C", "C->D", "D->E"}, "E", D::Hard, P::Posttest},
        {"post3", {"A", "A->B", "A&B->C", "C->D"}, "D", D::Hard, P::Posttest},
    });
}

}  // namespace helpneed

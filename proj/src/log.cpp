#include "helpneed/log.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "helpneed/errors.hpp"

namespace helpneed {

using nlohmann::json;

const char* to_string(ActionKind k) {
    switch (k) {
        case ActionKind::Derive: return "derive";
        case ActionKind::Delete: return "delete";
        case ActionKind::HintRequest: return "hint_request";
        case ActionKind::HintGiven: return "hint_given";
        case ActionKind::HintJustify: return "hint_justify";
    }
    return "?";
}

const char* to_string(HintKind k) { return k == HintKind::Proactive ? "proactive" : "on_demand"; }

std::string AttemptLog::start_key() const { return records.empty() ? std::string{} : records.front().pre_key; }
std::string AttemptLog::final_key() const { return records.empty() ? std::string{} : records.back().post_key; }

std::size_t AttemptLog::state_changing_count() const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.action.changes_state();
    return n;
}

std::vector<StepGroup> step_groups(const AttemptLog& attempt) {
    std::vector<StepGroup> out;
    StepGroup cur;
    double elapsed = 0.0;
    const auto& recs = attempt.records;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        if (r.action.kind == ActionKind::HintJustify && !out.empty() && out.back().last_record + 1 == i &&
            cur.duration_s == 0.0 && cur.hint_requests == 0 && cur.proactive_hints == 0 && cur.on_demand_hints == 0) {
            out.back().last_record = i;
            out.back().justified = true;
            out.back().duration_s += r.duration_s;
            cur.first_record = i + 1;
            continue;
        }
        cur.duration_s += r.duration_s;
        cur.wrong_apps += r.wrong_app_count;
        elapsed += r.duration_s;
        switch (r.action.kind) {
            case ActionKind::HintRequest:
                ++cur.hint_requests;
                if (cur.first_request_elapsed_s < 0) cur.first_request_elapsed_s = elapsed;
                break;
            case ActionKind::HintGiven:
                if (r.action.hint_kind == HintKind::Proactive) ++cur.proactive_hints;
                else ++cur.on_demand_hints;
                break;
            case ActionKind::HintJustify: break;
            case ActionKind::Derive:
            case ActionKind::Delete:
                cur.change_record = i;
                cur.last_record = i;
                cur.pre_key = r.pre_key;
                cur.post_key = r.post_key;
                out.push_back(cur);
                cur = StepGroup{};
                cur.first_record = i + 1;
                elapsed = 0.0;
                break;
        }
    }
    return out;
}

json to_json(const StepRecord& r) {
    json a = {{"kind", to_string(r.action.kind)}};
    if (r.action.rule) a["rule"] = rule_name(*r.action.rule);
    if (!r.action.premises.empty()) a["premises"] = r.action.premises;
    if (!r.action.derived.empty()) a["derived"] = r.action.derived;
    if (r.action.hint_kind) a["hint_kind"] = to_string(*r.action.hint_kind);
    return {{"student", r.student_id}, {"problem", r.problem_id}, {"attempt", r.attempt},
            {"seq", r.seq_no},         {"pre_state", r.pre_state},  {"action", a},
            {"post_state", r.post_state}, {"duration_s", r.duration_s}, {"wrong_apps", r.wrong_app_count},
            {"ts", r.timestamp}};
}

std::string to_jsonl(const StepRecord& r) { return to_json(r).dump(); }

void write_jsonl(std::ostream& out, const std::vector<AttemptLog>& attempts) {
    for (const auto& a : attempts)
        for (const auto& r : a.records) out << to_jsonl(r) << '\n';
}

namespace {

template <class T>
T field(const json& j, const char* name, std::size_t line) {
    auto it = j.find(name);
    if (it == j.end()) throw SchemaError(line, name, "missing");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw SchemaError(line, name, "wrong type");
    }
}

std::vector<std::string> statements(const json& j, const char* name, std::size_t line) {
    auto raw = field<std::vector<std::string>>(j, name, line);
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& s : raw) {
        std::string t;
        try {
            t = normalize(s);
        } catch (const SyntaxError& e) {
            throw SchemaError(line, name, e.what());
        }
        if (!seen.insert(t).second) throw SchemaError(line, name, "duplicate statement " + t);
        out.push_back(std::move(t));
    }
    return out;
}

Action parse_action(const json& j, std::size_t line) {
    auto it = j.find("action");
    if (it == j.end() || !it->is_object()) throw SchemaError(line, "action", "missing or not an object");
    const json& a = *it;
    Action act;
    std::string kind = field<std::string>(a, "kind", line);
    if (kind == "derive") act.kind = ActionKind::Derive;
    else if (kind == "delete") act.kind = ActionKind::Delete;
    else if (kind == "hint_request") act.kind = ActionKind::HintRequest;
    else if (kind == "hint_given") act.kind = ActionKind::HintGiven;
    else if (kind == "hint_justify") act.kind = ActionKind::HintJustify;
    else throw SchemaError(line, "action.kind", "unknown kind " + kind);

    if (a.contains("rule")) {
        auto r = rule_from_name(field<std::string>(a, "rule", line));
        if (!r) throw SchemaError(line, "action.rule", "unknown rule");
        act.rule = r;
    }
    if (a.contains("premises")) act.premises = field<std::vector<std::size_t>>(a, "premises", line);
    if (a.contains("derived")) {
        try {
            act.derived = normalize(field<std::string>(a, "derived", line));
        } catch (const SyntaxError& e) {
            throw SchemaError(line, "action.derived", e.what());
        }
    }
    if (a.contains("hint_kind")) {
        std::string hk = field<std::string>(a, "hint_kind", line);
        if (hk == "proactive") act.hint_kind = HintKind::Proactive;
        else if (hk == "on_demand") act.hint_kind = HintKind::OnDemand;
        else throw SchemaError(line, "action.hint_kind", "unknown hint kind " + hk);
    }
    if (act.kind == ActionKind::Derive && (!act.rule || act.derived.empty()))
        throw SchemaError(line, "action", "derive needs rule and derived");
    if (act.kind == ActionKind::Delete && act.premises.size() != 1)
        throw SchemaError(line, "action.premises", "delete needs exactly one statement index");
    if (act.kind == ActionKind::HintGiven && !act.hint_kind)
        throw SchemaError(line, "action.hint_kind", "hint_given needs hint_kind");
    return act;
}

void check_transition(const StepRecord& r, std::size_t n_givens, std::size_t line) {
    const auto& pre = r.pre_state;
    const auto& post = r.post_state;
    switch (r.action.kind) {
        case ActionKind::Derive: {
            for (auto p : r.action.premises)
                if (p >= pre.size()) throw SchemaError(line, "action.premises", "index out of range");
            bool ok = post.size() == pre.size() + 1 && std::equal(pre.begin(), pre.end(), post.begin()) &&
                      post.back() == r.action.derived;
            if (!ok) throw SchemaError(line, "post_state", "derive must append the derived statement");
            break;
        }
        case ActionKind::Delete: {
            std::size_t idx = r.action.premises[0];
            if (idx >= pre.size() || idx < n_givens)
                throw SchemaError(line, "action.premises", "delete index must name a derived statement");
            auto expect = pre;
            expect.erase(expect.begin() + static_cast<std::ptrdiff_t>(idx));
            if (post != expect) throw SchemaError(line, "post_state", "delete must remove exactly the named statement");
            break;
        }
        default:
            if (post != pre) throw SchemaError(line, "post_state", "hint events must not change the state");
    }
}

}  // namespace

std::vector<AttemptLog> ingest_attempts(std::istream& in, const ProblemSet& problems) {
    std::vector<AttemptLog> out;
    std::map<std::tuple<std::string, std::string, int>, std::size_t> index;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw SchemaError(line, "<json>", e.what());
        }
        if (!j.is_object()) throw SchemaError(line, "<json>", "record must be an object");

        StepRecord r;
        r.student_id = field<std::string>(j, "student", line);
        r.problem_id = field<std::string>(j, "problem", line);
        r.attempt = field<int>(j, "attempt", line);
        r.seq_no = field<int>(j, "seq", line);
        if (r.attempt < 0) throw SchemaError(line, "attempt", "negative");
        if (r.seq_no < 0) throw SchemaError(line, "seq", "negative");
        if (!problems.contains(r.problem_id)) throw SchemaError(line, "problem", "not in problem catalog");
        const Problem& prob = problems.at(r.problem_id);
        r.pre_state = statements(j, "pre_state", line);
        r.post_state = statements(j, "post_state", line);
        r.action = parse_action(j, line);
        r.duration_s = field<double>(j, "duration_s", line);
        if (!std::isfinite(r.duration_s) || r.duration_s < 0) throw SchemaError(line, "duration_s", "must be finite and >= 0");
        r.wrong_app_count = field<int>(j, "wrong_apps", line);
        if (r.wrong_app_count < 0) throw SchemaError(line, "wrong_apps", "negative");
        r.timestamp = field<double>(j, "ts", line);
        if (!std::isfinite(r.timestamp)) throw SchemaError(line, "ts", "must be finite");
        r.pre_key = state_key(r.problem_id, r.pre_state);
        r.post_key = state_key(r.problem_id, r.post_state);

        auto gkey = std::make_tuple(r.student_id, r.problem_id, r.attempt);
        auto it = index.find(gkey);
        if (it == index.end()) {
            if (r.seq_no != 0) throw ChainBreak(line, "attempt does not start at seq 0");
            if (r.pre_key != state_key(prob.id, prob.givens))
                throw ChainBreak(line, "first pre_state differs from the problem givens");
            index.emplace(gkey, out.size());
            out.push_back({r.student_id, r.problem_id, r.attempt, {}, false, prob.conclusion});
        } else {
            const StepRecord& prev = out[it->second].records.back();
            if (r.seq_no != prev.seq_no + 1)
                throw ChainBreak(line, "seq " + std::to_string(r.seq_no) + " follows " + std::to_string(prev.seq_no));
            if (r.pre_key != prev.post_key) throw ChainBreak(line, "pre_key differs from previous post_key");
        }
        check_transition(r, prob.givens.size(), line);
        out[index.at(gkey)].records.push_back(std::move(r));
    }
    for (auto& a : out) {
        const Problem& prob = problems.at(a.problem_id);
        const auto& fin = a.records.back().post_state;
        a.completed = std::find(fin.begin(), fin.end(), prob.conclusion) != fin.end();
    }
    return out;
}

std::vector<AttemptLog> ingest_file(const std::string& path, const ProblemSet& problems) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open log file: " + path);
    return ingest_attempts(in, problems);
}

}  // namespace helpneed

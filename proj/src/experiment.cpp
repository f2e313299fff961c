#include "helpneed/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "helpneed/errors.hpp"

namespace helpneed {

using nlohmann::json;

std::size_t eight_way_index(bool pred_hn, bool hinted, bool observed_hn) {
    return (pred_hn ? 4u : 0u) + (hinted ? 2u : 0u) + (observed_hn ? 1u : 0u);
}

std::string eight_way_label(std::size_t i) {
    std::string s = (i & 4) ? "pred-HN" : "pred-OK";
    s += (i & 2) ? "+hints" : "+noHints";
    s += (i & 1) ? "+obs-HN" : "+obs-OK";
    return s;
}

StudentHelpBehavior summarize_steps(const std::string& student, const std::vector<StepObservation>& steps) {
    StudentHelpBehavior b;
    b.student = student;
    b.steps = static_cast<long>(steps.size());
    long avoid = 0, abuse = 0, appropriate = 0, hinted = 0;
    for (const auto& s : steps) {
        ++b.eight[eight_way_index(s.predicted_hn, s.hinted, s.observed_hn)];
        if (s.observed_hn && !s.hinted && !s.requested) ++avoid;
        if (!s.predicted_hn && !s.observed_hn && s.requested) ++abuse;
        if (s.predicted_hn && s.hinted) ++appropriate;
        if (s.hinted) ++hinted;
    }
    if (b.steps > 0) {
        const double n = static_cast<double>(b.steps);
        b.possible_help_avoidance = 100.0 * avoid / n;
        b.possible_help_abuse = 100.0 * abuse / n;
        b.possible_help_appropriateness = 100.0 * appropriate / n;
        b.hinted_proportion = hinted / n;
    }
    return b;
}

namespace {

using AnnKey = std::tuple<std::string, std::string, int, std::size_t>;

struct Classified {
    const AttemptLog* attempt;
    std::vector<StepGroup> groups;
    std::vector<ClassifiedStep> steps;
};

std::vector<Classified> classify_phase(const std::vector<AttemptLog>& attempts, const ProblemSet& problems,
                                       Phase phase, const QualityTables& quality, const DurationModel& durations,
                                       EfficiencyMetric metric) {
    std::vector<Classified> out;
    for (const auto& a : attempts) {
        if (problems.at(a.problem_id).phase != phase) continue;
        const QualityTable* q = quality.find(a.problem_id);
        if (!q) throw UnknownState("no quality table for problem " + a.problem_id);
        out.push_back({&a, step_groups(a), classify_attempt(a, *q, durations, metric)});
    }
    return out;
}

}  // namespace

HelpBehaviorReport evaluate_help_behavior(const std::vector<AttemptLog>& attempts,
                                          const std::vector<StepAnnotation>& annotations,
                                          const ProblemSet& problems, const QualityTables& quality,
                                          const DurationModel& durations, EfficiencyMetric metric,
                                          double too_quick_s) {
    std::map<AnnKey, int> pred;
    for (const auto& a : annotations) pred[{a.student, a.problem, a.attempt, a.group}] = a.predicted;

    std::vector<std::string> order;
    std::map<std::string, std::vector<StepObservation>> obs;
    std::map<std::string, StudentHelpBehavior> extra;
    for (const auto& c : classify_phase(attempts, problems, Phase::Training, quality, durations, metric)) {
        const AttemptLog& a = *c.attempt;
        if (!obs.count(a.student_id)) {
            order.push_back(a.student_id);
            obs[a.student_id];
        }
        auto& e = extra[a.student_id];
        for (std::size_t g = 0; g < c.groups.size(); ++g) {
            const StepGroup& sg = c.groups[g];
            auto it = pred.find({a.student_id, a.problem_id, a.attempt, g});
            StepObservation o;
            o.predicted_hn = it != pred.end() && it->second == 1;
            o.observed_hn = helpneed(c.steps[g].cls);
            o.hinted = sg.hinted();
            o.requested = sg.hint_requests > 0;
            obs[a.student_id].push_back(o);
            e.proactive_hints += sg.proactive_hints;
            e.on_demand_hints += sg.on_demand_hints;
            e.hints_justified += sg.justified ? 1 : 0;
            e.hint_requests += sg.hint_requests;
            if (sg.hint_requests > 0 && sg.first_request_elapsed_s < too_quick_s) ++e.too_quick_requests;
        }
    }
    HelpBehaviorReport r;
    for (const auto& id : order) {
        StudentHelpBehavior b = summarize_steps(id, obs[id]);
        const auto& e = extra[id];
        b.proactive_hints = e.proactive_hints;
        b.on_demand_hints = e.on_demand_hints;
        b.hints_justified = e.hints_justified;
        b.hint_requests = e.hint_requests;
        b.too_quick_requests = e.too_quick_requests;
        b.hjr = hjr(b.proactive_hints + b.on_demand_hints, b.hints_justified);
        for (std::size_t i = 0; i < 8; ++i) r.eight[i] += b.eight[i];
        r.state_changing_steps += b.steps;
        r.students.push_back(std::move(b));
    }
    return r;
}

json to_json(const HelpBehaviorReport& r) {
    json students = json::array();
    for (const auto& b : r.students) {
        students.push_back({{"student", b.student},
                            {"steps", b.steps},
                            {"possible_help_avoidance", b.possible_help_avoidance},
                            {"possible_help_abuse", b.possible_help_abuse},
                            {"possible_help_appropriateness", b.possible_help_appropriateness},
                            {"proactive_hints", b.proactive_hints},
                            {"on_demand_hints", b.on_demand_hints},
                            {"hints_justified", b.hints_justified},
                            {"hjr", b.hjr ? json(*b.hjr) : json(nullptr)},
                            {"hint_requests", b.hint_requests},
                            {"too_quick_requests", b.too_quick_requests},
                            {"hinted_proportion", b.hinted_proportion},
                            {"eight_way", b.eight}});
    }
    json eight = json::object();
    for (std::size_t i = 0; i < 8; ++i) eight[eight_way_label(i)] = r.eight[i];
    return {{"state_changing_steps", r.state_changing_steps}, {"eight_way", eight}, {"students", students}};
}

std::map<std::string, std::pair<double, double>> step_quartiles(const std::vector<AttemptLog>& attempts) {
    std::map<std::string, std::vector<double>> counts;
    for (const auto& a : attempts)
        if (a.completed) counts[a.problem_id].push_back(static_cast<double>(a.state_changing_count()));
    std::map<std::string, std::pair<double, double>> out;
    for (auto& [pid, v] : counts) out[pid] = {percentile(v, 0.25), percentile(v, 0.75)};
    return out;
}

json to_json(const ExperimentConfig& c) {
    return {{"population", to_json(c.population)},
            {"sim", to_json(c.sim)},
            {"adaptive", to_json(c.adaptive)},
            {"control", to_json(c.control)},
            {"too_quick_s", c.too_quick_s}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig c;
    for (const auto& [k, v] : j.items()) {
        if (k == "population") c.population = population_spec_from_json(v);
        else if (k == "sim") c.sim = sim_config_from_json(v);
        else if (k == "adaptive") c.adaptive = policy_config_from_json(v);
        else if (k == "control") c.control = policy_config_from_json(v);
        else if (k == "too_quick_s") c.too_quick_s = v.get<double>();
        else throw ConfigError("unknown experiment key: " + k);
    }
    return c;
}

Comparison compare(const std::string& measure, const std::vector<double>& a, const std::vector<double>& b) {
    Comparison c;
    c.measure = measure;
    c.mean_a = a.empty() ? 0.0 : mean(a);
    c.mean_b = b.empty() ? 0.0 : mean(b);
    if (!a.empty() && !b.empty()) c.mann_whitney = mann_whitney(a, b);
    if (a.size() >= 2 && b.size() >= 2) c.welch = welch_t(a, b);
    return c;
}

ConditionReport run_condition(const std::string& name, const PolicyConfig& policy, const TutorKnowledge& tk,
                              const ExperimentConfig& cfg, std::uint64_t seed) {
    if (!tk.problems) throw ConfigError("tutor knowledge has no problem set");
    TutorContext ctx;
    ctx.problems = tk.problems;
    ctx.networks = &tk.networks;
    ctx.quality = &tk.quality;
    ctx.predictor = tk.predictor ? &*tk.predictor : nullptr;
    ctx.session_gap_s = tk.session_gap_s;

    ConditionReport r;
    r.name = name;
    r.policy = policy;
    r.output = simulate_population(*tk.problems, cfg.population, cfg.sim, policy, ctx, seed);
    r.behavior = evaluate_help_behavior(r.output.attempts, r.output.annotations, *tk.problems, tk.quality,
                                        tk.durations, tk.metric, cfg.too_quick_s);

    std::map<std::string, StudentOutcome> by_student;
    for (const auto& s : r.output.students) {
        by_student[s.id].student = s.id;
        by_student[s.id].tag = s.tag;
    }

    for (const auto& c : classify_phase(r.output.attempts, *tk.problems, Phase::Training, tk.quality, tk.durations,
                                        tk.metric))
        for (const auto& st : c.steps) {
            ++by_student[c.attempt->student_id].classes[static_cast<std::size_t>(st.cls)];
            ++r.class_totals[static_cast<std::size_t>(st.cls)];
        }

    // Posttest: the last attempt per (student, problem) counts.
    std::map<std::pair<std::string, std::string>, const AttemptLog*> last;
    for (const auto& a : r.output.attempts)
        if (tk.problems->at(a.problem_id).phase == Phase::Posttest) last[{a.student_id, a.problem_id}] = &a;
    std::map<std::string, std::vector<double>> opt, times;
    std::map<std::string, std::pair<long, long>> apps;
    for (const auto& a : r.output.attempts) {
        if (tk.problems->at(a.problem_id).phase != Phase::Posttest) continue;
        for (const auto& g : step_groups(a)) {
            times[a.student_id].push_back(g.duration_s);
            const auto& rec = a.records[g.change_record];
            if (rec.action.kind == ActionKind::Derive) ++apps[a.student_id].first;
            apps[a.student_id].second += g.wrong_apps;
        }
    }
    for (const auto& [key, a] : last) {
        double o = 0.0;
        if (a->completed) {
            auto qit = tk.quartiles.find(a->problem_id);
            double q1 = qit != tk.quartiles.end() ? qit->second.first : 0.0;
            double q3 = qit != tk.quartiles.end() ? qit->second.second : 1.0;
            if (!(q3 > q1)) q3 = q1 + 1.0;
            o = optimality(static_cast<double>(a->state_changing_count()), q1, q3);
        }
        opt[key.first].push_back(o);
    }
    for (const auto& s : r.output.students) {
        StudentOutcome& o = by_student[s.id];
        if (!opt[s.id].empty()) o.post_optimality = mean(opt[s.id]);
        o.post_time_min = capped_time(times[s.id]);
        o.post_accuracy = accuracy(apps[s.id].first, apps[s.id].second);
        r.students.push_back(o);
    }
    return r;
}

ExperimentReport run_experiment(const TutorKnowledge& tk, const ExperimentConfig& cfg, std::uint64_t seed) {
    ExperimentReport rep;
    rep.seed = seed;
    rep.a = run_condition(to_string(cfg.adaptive.mode), cfg.adaptive, tk, cfg, seed);
    rep.b = run_condition(to_string(cfg.control.mode), cfg.control, tk, cfg, seed);

    auto per_student = [](const ConditionReport& c, auto f) {
        std::vector<double> v;
        std::map<std::string, const StudentHelpBehavior*> beh;
        for (const auto& b : c.behavior.students) beh[b.student] = &b;
        for (const auto& s : c.students) {
            auto it = beh.find(s.student);
            std::optional<double> x = f(s, it == beh.end() ? nullptr : it->second);
            if (x) v.push_back(*x);
        }
        return v;
    };
    auto add = [&](const std::string& name, auto f) {
        rep.comparisons.push_back(compare(name, per_student(rep.a, f), per_student(rep.b, f)));
    };
    auto cls = [](StepClass c) {
        return [c](const StudentOutcome& o, const StudentHelpBehavior*) -> std::optional<double> {
            return static_cast<double>(o.classes[static_cast<std::size_t>(c)]);
        };
    };
    add("post_optimality", [](const StudentOutcome& o, const StudentHelpBehavior*) -> std::optional<double> {
        return o.post_optimality;
    });
    add("post_time_min", [](const StudentOutcome& o, const StudentHelpBehavior*) -> std::optional<double> {
        return o.post_time_min;
    });
    add("post_accuracy", [](const StudentOutcome& o, const StudentHelpBehavior*) { return o.post_accuracy; });
    for (StepClass c : {StepClass::Expert, StepClass::Strategic, StepClass::Opportunistic, StepClass::FarOff,
                        StepClass::Futile})
        add(std::string("steps_") + to_string(c), cls(c));
    add("steps_FarOff+Opportunistic", [](const StudentOutcome& o, const StudentHelpBehavior*) -> std::optional<double> {
        return static_cast<double>(o.classes[static_cast<std::size_t>(StepClass::FarOff)] +
                                   o.classes[static_cast<std::size_t>(StepClass::Opportunistic)]);
    });
    auto beh = [](double StudentHelpBehavior::*m) {
        return [m](const StudentOutcome&, const StudentHelpBehavior* b) -> std::optional<double> {
            if (!b) return std::nullopt;
            return b->*m;
        };
    };
    add("possible_help_avoidance", beh(&StudentHelpBehavior::possible_help_avoidance));
    add("possible_help_abuse", beh(&StudentHelpBehavior::possible_help_abuse));
    add("possible_help_appropriateness", beh(&StudentHelpBehavior::possible_help_appropriateness));
    add("hinted_proportion", beh(&StudentHelpBehavior::hinted_proportion));
    add("hjr", [](const StudentOutcome&, const StudentHelpBehavior* b) -> std::optional<double> {
        return b ? b->hjr : std::nullopt;
    });
    return rep;
}

namespace {

json condition_json(const ConditionReport& c) {
    json students = json::array();
    for (const auto& s : c.students) {
        json classes = json::object();
        for (std::size_t i = 0; i < 5; ++i) classes[to_string(static_cast<StepClass>(i))] = s.classes[i];
        students.push_back({{"student", s.student},
                            {"tag", s.tag},
                            {"post_optimality", s.post_optimality},
                            {"post_time_min", s.post_time_min},
                            {"post_accuracy", s.post_accuracy ? json(*s.post_accuracy) : json(nullptr)},
                            {"classes", classes}});
    }
    json totals = json::object();
    for (std::size_t i = 0; i < 5; ++i) totals[to_string(static_cast<StepClass>(i))] = c.class_totals[i];
    return {{"name", c.name},
            {"policy", to_json(c.policy)},
            {"class_totals", totals},
            {"students", students},
            {"help_behavior", to_json(c.behavior)}};
}

}  // namespace

json to_json(const ExperimentReport& r) {
    json comps = json::array();
    for (const auto& c : r.comparisons)
        comps.push_back({{"measure", c.measure},
                         {"mean_" + r.a.name, c.mean_a},
                         {"mean_" + r.b.name, c.mean_b},
                         {"mann_whitney", {{"u", c.mann_whitney.u}, {"z", c.mann_whitney.z}, {"p", c.mann_whitney.p}}},
                         {"welch", {{"t", c.welch.t}, {"df", c.welch.df}, {"p", c.welch.p}}}});
    return {{"seed", r.seed}, {"conditions", {condition_json(r.a), condition_json(r.b)}}, {"comparisons", comps}};
}

std::string step_class_csv(const ExperimentReport& r) {
    std::ostringstream out;
    out << "class";
    for (const auto* c : {&r.a, &r.b}) out << ',' << c->name << "_total," << c->name << "_mean";
    out << ",U,z,p\n";
    for (std::size_t i = 0; i < 5; ++i) {
        const std::string name = to_string(static_cast<StepClass>(i));
        out << name;
        for (const auto* c : {&r.a, &r.b}) {
            double n = static_cast<double>(std::max<std::size_t>(c->students.size(), 1));
            out << ',' << c->class_totals[i] << ',' << c->class_totals[i] / n;
        }
        for (const auto& cmp : r.comparisons)
            if (cmp.measure == "steps_" + name)
                out << ',' << cmp.mann_whitney.u << ',' << cmp.mann_whitney.z << ',' << cmp.mann_whitney.p;
        out << '\n';
    }
    return out.str();
}

std::string hint_csv(const ExperimentReport& r) {
    std::ostringstream out;
    out << "condition,proactive,on_demand,total,justified,hjr\n";
    for (const auto* c : {&r.a, &r.b}) {
        long pro = 0, od = 0, just = 0;
        for (const auto& b : c->behavior.students) {
            pro += b.proactive_hints;
            od += b.on_demand_hints;
            just += b.hints_justified;
        }
        auto h = hjr(pro + od, just);
        out << c->name << ',' << pro << ',' << od << ',' << pro + od << ',' << just << ',';
        if (h) out << *h;
        out << '\n';
    }
    return out.str();
}

std::string eight_way_csv(const ExperimentReport& r) {
    std::ostringstream out;
    out << "condition,prediction,hints,observed,count\n";
    for (const auto* c : {&r.a, &r.b})
        for (std::size_t i = 0; i < 8; ++i)
            out << c->name << ',' << ((i & 4) ? "HN" : "OK") << ',' << ((i & 2) ? "hinted" : "noHints") << ','
                << ((i & 1) ? "HN" : "OK") << ',' << c->behavior.eight[i] << '\n';
    return out.str();
}

std::string histogram_csv(const ExperimentReport& r) {
    std::ostringstream out;
    out << "condition,student,hinted_proportion,too_quick_requests\n";
    for (const auto* c : {&r.a, &r.b})
        for (const auto& b : c->behavior.students)
            out << c->name << ',' << b.student << ',' << b.hinted_proportion << ',' << b.too_quick_requests << '\n';
    return out.str();
}

}  // namespace helpneed

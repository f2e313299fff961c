#include "helpneed/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "helpneed/errors.hpp"
#include "helpneed/features.hpp"

namespace helpneed {

using nlohmann::json;

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void check_range(const Range& r, const char* name) {
    if (!(r.lo >= 0.0 && r.hi <= 1.0 && r.lo <= r.hi)) throw ConfigError(std::string(name) + " range must lie in [0,1]");
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

Range range_from(const json& v, const char* name) {
    auto a = v.get<std::vector<double>>();
    if (a.size() != 2) throw ConfigError(std::string(name) + " must be [lo, hi]");
    Range r{a[0], a[1]};
    check_range(r, name);
    return r;
}

}  // namespace

json to_json(const PopulationSpec& p) {
    return {{"n_students", p.n_students},       {"skill", range_json(p.skill)},
            {"hint_follow", range_json(p.hint_follow)}, {"help_seek", range_json(p.help_seek)},
            {"speed_sigma", p.speed_sigma},     {"tags", p.tags},
            {"id_prefix", p.id_prefix}};
}

PopulationSpec population_spec_from_json(const json& j) {
    PopulationSpec p;
    for (const auto& [k, v] : j.items()) {
        if (k == "n_students") p.n_students = v.get<int>();
        else if (k == "skill") p.skill = range_from(v, "skill");
        else if (k == "hint_follow") p.hint_follow = range_from(v, "hint_follow");
        else if (k == "help_seek") p.help_seek = range_from(v, "help_seek");
        else if (k == "speed_sigma") p.speed_sigma = v.get<double>();
        else if (k == "tags") p.tags = v.get<std::vector<std::string>>();
        else if (k == "id_prefix") p.id_prefix = v.get<std::string>();
        else throw ConfigError("unknown population key: " + k);
    }
    if (p.n_students <= 0) throw ConfigError("n_students must be positive");
    if (p.tags.empty()) throw ConfigError("tags must not be empty");
    return p;
}

json to_json(const SimConfig& c) {
    return {{"easy_step_s", c.easy_step_s},
            {"hard_step_s", c.hard_step_s},
            {"time_sigma", c.time_sigma},
            {"confused_time_factor", c.confused_time_factor},
            {"hint_time_factor", c.hint_time_factor},
            {"cap_factor", c.cap_factor},
            {"cap_extra", c.cap_extra},
            {"restart_prob", c.restart_prob},
            {"max_attempts", c.max_attempts},
            {"session_break_prob", c.session_break_prob},
            {"session_break_s", c.session_break_s},
            {"delete_prob", c.delete_prob},
            {"confusion_penalty", c.confusion_penalty},
            {"wrong_app_rate", c.wrong_app_rate},
            {"hint_ttl", c.hint_ttl}};
}

SimConfig sim_config_from_json(const json& j) {
    SimConfig c;
    for (const auto& [k, v] : j.items()) {
        if (k == "easy_step_s") c.easy_step_s = v.get<double>();
        else if (k == "hard_step_s") c.hard_step_s = v.get<double>();
        else if (k == "time_sigma") c.time_sigma = v.get<double>();
        else if (k == "confused_time_factor") c.confused_time_factor = v.get<double>();
        else if (k == "hint_time_factor") c.hint_time_factor = v.get<double>();
        else if (k == "cap_factor") c.cap_factor = v.get<double>();
        else if (k == "cap_extra") c.cap_extra = v.get<int>();
        else if (k == "restart_prob") c.restart_prob = v.get<double>();
        else if (k == "max_attempts") c.max_attempts = v.get<int>();
        else if (k == "session_break_prob") c.session_break_prob = v.get<double>();
        else if (k == "session_break_s") c.session_break_s = v.get<double>();
        else if (k == "delete_prob") c.delete_prob = v.get<double>();
        else if (k == "confusion_penalty") c.confusion_penalty = v.get<double>();
        else if (k == "wrong_app_rate") c.wrong_app_rate = v.get<double>();
        else if (k == "hint_ttl") c.hint_ttl = v.get<int>();
        else throw ConfigError("unknown simulation key: " + k);
    }
    if (c.max_attempts < 1 || c.cap_factor <= 0) throw ConfigError("invalid simulation limits");
    return c;
}

std::vector<SimStudent> draw_population(const PopulationSpec& spec, std::uint64_t seed) {
    check_range(spec.skill, "skill");
    check_range(spec.hint_follow, "hint_follow");
    check_range(spec.help_seek, "help_seek");
    std::vector<SimStudent> out;
    for (int i = 0; i < spec.n_students; ++i) {
        std::uint64_t s = mix(seed ^ mix(static_cast<std::uint64_t>(i) + 1));
        std::mt19937_64 rng(s);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> z(0.0, 1.0);
        SimStudent st;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%03d", i);
        st.id = spec.id_prefix + buf;
        st.skill = spec.skill.lo + (spec.skill.hi - spec.skill.lo) * u(rng);
        st.hint_follow = spec.hint_follow.lo + (spec.hint_follow.hi - spec.hint_follow.lo) * u(rng);
        st.help_seek = spec.help_seek.lo + (spec.help_seek.hi - spec.help_seek.lo) * u(rng);
        st.speed = std::exp(spec.speed_sigma * z(rng));
        st.seed = mix(s ^ 0x51ed5eedULL);
        st.tag = spec.tags[static_cast<std::size_t>(i) % spec.tags.size()];
        out.push_back(st);
    }
    return out;
}

Simulator::Simulator(const ProblemSet& problems, SimConfig cfg) : problems_(problems), cfg_(cfg) {
    for (const auto& p : problems.problems()) solvers_.emplace(p.id, std::make_shared<ShortestCompletion>(p));
}

namespace {

struct Rng {
    std::mt19937_64 gen;
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(gen); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen); }
    double lognormal(double median, double sigma) {
        return median * std::exp(sigma * std::normal_distribution<double>(0.0, 1.0)(gen));
    }
};

}  // namespace

std::vector<AttemptLog> Simulator::run_student(const SimStudent& s, const PolicyConfig& policy,
                                               const TutorContext& tutor,
                                               std::vector<StepAnnotation>* annotations) const {
    Rng rng{std::mt19937_64(s.seed)};
    FeatureTracker tracker(tutor.session_gap_s);
    std::vector<AttemptLog> out;
    double ts = 0.0;

    auto hint_target = [&](const ProofState& state, const InteractionNetwork* net,
                           const QualityTable* q) -> std::optional<std::string> {
        if (net && q) {
            try {
                auto h = choose_hint(state_key(state), *net, *q);
                if (!state.contains(h.target)) return h.target;
            } catch (const NoSuccessor&) {
            }
        }
        auto moves = solvers_.at(state.problem_id())->optimal_moves(state);
        if (moves.empty()) return std::nullopt;
        return moves.front().derived;
    };

    for (Phase phase : {Phase::Pretest, Phase::Training, Phase::Posttest}) {
        for (const Problem* prob : problems_.in_phase(phase)) {
            ts += (ts > 0 && rng.uniform() < cfg_.session_break_prob) ? cfg_.session_break_s : 10.0;
            const bool hints_allowed = phase == Phase::Training;
            const ShortestCompletion& solver = *solvers_.at(prob->id);
            const InteractionNetwork* net = nullptr;
            if (tutor.networks)
                if (auto it = tutor.networks->find(prob->id); it != tutor.networks->end()) net = &it->second;
            const QualityTable* q = tutor.quality ? tutor.quality->find(prob->id) : nullptr;
            const auto atoms = prob->atoms();
            const int cap = static_cast<int>(std::ceil(cfg_.cap_factor * solver.shortest_length())) + cfg_.cap_extra;
            const double base = (prob->difficulty == Difficulty::Easy ? cfg_.easy_step_s : cfg_.hard_step_s) * s.speed /
                                (0.5 + s.skill);

            for (int attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
                AttemptLog log{s.id, prob->id, attempt, {}, false, prob->conclusion};
                ProofState state = prob->start();
                const std::string start = state_key(state);
                std::string prev_key = start, cur_key = start;
                tracker.begin_attempt(prob->id, prob->difficulty, ts);
                std::optional<std::string> pending;
                int ttl = 0;
                bool confused = false;
                int consecutive = 0;
                int seq = 0;
                int dist = solver.distance(state);
                std::size_t group = 0;

                auto emit = [&](Action a, double dur, int wrong, const ProofState& pre, const ProofState& post) {
                    StepRecord r;
                    r.student_id = s.id;
                    r.problem_id = prob->id;
                    r.attempt = attempt;
                    r.seq_no = seq++;
                    r.pre_state = pre.statements();
                    r.post_state = post.statements();
                    r.pre_key = state_key(pre);
                    r.post_key = state_key(post);
                    r.action = std::move(a);
                    r.duration_s = dur;
                    r.wrong_app_count = wrong;
                    ts += dur;
                    r.timestamp = ts;
                    log.records.push_back(std::move(r));
                };

                for (int steps = 0; steps < cap && !is_goal(state); ++steps, ++group) {
                    const std::size_t first_record = log.records.size();
                    int predicted = -1;
                    if (hints_allowed && tutor.predictor) {
                        FeatureRow row = tracker.features(q, start, prev_key, cur_key, state.size());
                        StepPrediction p = predict_step(*tutor.predictor, row.values, row.state_known);
                        predicted = p.label;
                        if (annotations)
                            annotations->push_back({s.id, prob->id, attempt, group, p.label, p.probability, row.state_known});
                    }
                    if (hints_allowed) {
                        double u = rng.uniform();
                        if (policy_decide(policy, predicted == 1, consecutive, u) == Decision::GiveProactive) {
                            if (auto t = hint_target(state, net, q)) {
                                Action a;
                                a.kind = ActionKind::HintGiven;
                                a.hint_kind = HintKind::Proactive;
                                a.derived = *t;
                                emit(a, 0.0, 0, state, state);
                                pending = t;
                                ttl = cfg_.hint_ttl;
                                ++consecutive;
                            } else {
                                consecutive = 0;
                            }
                        } else {
                            consecutive = 0;
                        }
                    }

                    const double skill = confused ? s.skill * cfg_.confusion_penalty : s.skill;
                    double step_time = rng.lognormal(base * (confused ? cfg_.confused_time_factor : 1.0), cfg_.time_sigma);

                    if (hints_allowed && !pending && confused && rng.uniform() < s.help_seek) {
                        if (auto t = hint_target(state, net, q)) {
                            double elapsed = step_time * (0.05 + 0.55 * rng.uniform());
                            Action req;
                            req.kind = ActionKind::HintRequest;
                            emit(req, elapsed, 0, state, state);
                            Action given;
                            given.kind = ActionKind::HintGiven;
                            given.hint_kind = HintKind::OnDemand;
                            given.derived = *t;
                            emit(given, 0.0, 0, state, state);
                            step_time -= elapsed;
                            pending = t;
                            ttl = cfg_.hint_ttl;
                        }
                    }

                    auto legal = legal_derivations(state, {kAllRules.begin(), kAllRules.end()}, atoms);
                    const Derivation* chosen = nullptr;
                    bool follow = false;
                    if (pending && rng.uniform() < s.hint_follow) {
                        for (const auto& d : legal)
                            if (d.derived == *pending) {
                                chosen = &d;
                                follow = true;
                                break;
                            }
                    }
                    std::optional<std::size_t> delete_index;
                    std::vector<Derivation> optimal;
                    if (!chosen) {
                        std::vector<std::size_t> junk;
                        const auto& uni = solver.universe();
                        for (std::size_t i = state.given_count(); i < state.size(); ++i)
                            if (std::find(uni.begin(), uni.end(), state.statements()[i]) == uni.end()) junk.push_back(i);
                        if (!junk.empty() && confused && rng.uniform() < cfg_.delete_prob) {
                            delete_index = junk.back();
                        } else if (rng.uniform() < skill && !(optimal = solver.optimal_moves(state)).empty()) {
                            chosen = &optimal[rng.index(optimal.size())];
                        } else if (!legal.empty()) {
                            chosen = &legal[rng.index(legal.size())];
                        } else {
                            break;
                        }
                    }
                    if (follow) step_time *= cfg_.hint_time_factor;
                    int wrong = 0;
                    while (wrong < 5 && rng.uniform() < cfg_.wrong_app_rate * (1.0 - skill)) ++wrong;

                    ProofState next;
                    Action a;
                    if (delete_index) {
                        a.kind = ActionKind::Delete;
                        a.premises = {*delete_index};
                        a.derived = state.statements()[*delete_index];
                        next = state.without(*delete_index);
                    } else {
                        a.kind = ActionKind::Derive;
                        a.rule = chosen->rule;
                        a.premises = chosen->premises;
                        a.derived = chosen->derived;
                        next = state.with_derived(parse(chosen->derived));
                    }
                    emit(a, std::max(step_time, 1.0), wrong, state, next);
                    if (follow) {
                        Action j;
                        j.kind = ActionKind::HintJustify;
                        j.derived = *pending;
                        emit(j, 0.0, 0, next, next);
                        pending.reset();
                    } else if (pending && --ttl <= 0) {
                        pending.reset();
                    }
                    for (std::size_t i = first_record; i < log.records.size(); ++i) tracker.observe(log.records[i]);

                    int next_dist = solver.distance(next);
                    confused = next_dist >= dist;
                    dist = next_dist;
                    prev_key = cur_key;
                    cur_key = state_key(next);
                    state = std::move(next);
                }
                log.completed = is_goal(state);
                tracker.end_attempt(log.completed);
                bool done = log.completed;
                out.push_back(std::move(log));
                if (done || rng.uniform() >= cfg_.restart_prob) break;
                ts += 5.0;
            }
        }
    }
    return out;
}

SimOutput Simulator::run(const std::vector<SimStudent>& students, const PolicyConfig& policy,
                         const TutorContext& tutor) const {
    SimOutput out;
    out.students = students;
    for (const auto& s : students) {
        auto logs = run_student(s, policy, tutor, &out.annotations);
        out.attempts.insert(out.attempts.end(), std::make_move_iterator(logs.begin()), std::make_move_iterator(logs.end()));
    }
    return out;
}

SimOutput simulate_population(const ProblemSet& problems, const PopulationSpec& spec, const SimConfig& cfg,
                              const PolicyConfig& policy, const TutorContext& tutor, std::uint64_t seed) {
    Simulator sim(problems, cfg);
    return sim.run(draw_population(spec, seed), policy, tutor);
}

}  // namespace helpneed

#include <doctest.h>

#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "helpneed/errors.hpp"
#include "helpneed/experiment.hpp"
#include "helpneed/fixtures.hpp"
#include "helpneed/pipeline.hpp"
#include "helpneed/policy.hpp"

using namespace helpneed;
using nlohmann::json;

namespace {

// start -> goal per entry of (derived statement, count, solution length).
InteractionNetwork fan(const std::vector<std::tuple<std::string, long, int>>& goals) {
    InteractionNetwork net;
    net.problem_id = "fan";
    net.start_key = "fan|S";
    net.vertices[net.start_key] = VertexInfo{1, true, false, 0, false};
    for (const auto& [text, count, len] : goals) {
        std::string k = "fan|" + text;
        net.vertices[k] = VertexInfo{count, false, len > 0, len, len == 0};
        net.edges[{net.start_key, "derive|MP|A,A->" + text + "|" + text}] = {k, count};
    }
    return net;
}

const ProblemSet& curriculum() {
    static const ProblemSet ps = default_curriculum();
    return ps;
}

// Historical knowledge from a small Control population.
const TutorKnowledge& knowledge() {
    static const TutorKnowledge tk = [] {
        PopulationSpec spec;
        spec.n_students = 40;
        spec.id_prefix = "h";
        auto hist = generate_historical(curriculum(), spec, SimConfig{}, 11);
        return build_knowledge(curriculum(), hist.attempts, RewardConfig{}, EfficiencyMetric::GlobalAbsolute, 1800.0);
    }();
    return tk;
}

HelpNeedModel always(Variant v, double p) {
    HelpNeedModel m;
    m.variant = v;
    const auto& all = feature_names();
    m.manifest = v == Variant::StateBased
                     ? all
                     : std::vector<std::string>(all.begin() + static_cast<std::ptrdiff_t>(kQualityFeatureCount), all.end());
    m.selected = {0};
    m.normalizer.mean = {0.0};
    m.normalizer.sd = {1.0};
    m.forest = RandomForest::from_json({{"n_features", 1},
                                        {"importances", {1.0}},
                                        {"trees", {{{"feature", {-1}},
                                                    {"threshold", {0.0}},
                                                    {"left", {-1}},
                                                    {"right", {-1}},
                                                    {"p1", {p}}}}}});
    return m;
}

std::string jsonl(const std::vector<AttemptLog>& logs) {
    std::ostringstream ss;
    write_jsonl(ss, logs);
    return ss.str();
}

ExperimentConfig small_experiment() {
    ExperimentConfig c;
    c.population.n_students = 12;
    return c;
}

long sum(const EightWay& e) { return std::accumulate(e.begin(), e.end(), 0L); }

}  // namespace

TEST_CASE("choose_hint: maximal global quality successor") {
    auto net = build_network(fixtures::branch_corpus(), "chain");
    auto q = solve_quality(net, RewardConfig{});
    auto h = choose_hint(net.start_key, net, q);
    CHECK(h.target == "B");
    CHECK_FALSE(h.justified);
    bool found = false;
    for (const auto& s : net.successors(net.start_key))
        if (q.at(s.to_key).gqv == doctest::Approx(89.0).epsilon(1e-10)) found = true;
    CHECK(found);

    std::string goal;
    for (const auto& [k, v] : net.vertices)
        if (v.is_goal) goal = k;
    CHECK_THROWS_AS(choose_hint(goal, net, q), NoSuccessor);
    CHECK_THROWS_AS(choose_hint("chain|nowhere", net, q), NoSuccessor);
}

TEST_CASE("choose_hint: ties by count, then by statement") {
    auto by_count = fan({{"Z", 5, 4}, {"Y", 2, 4}});
    CHECK(choose_hint(by_count.start_key, by_count, solve_quality(by_count, RewardConfig{})).target == "Z");
    auto by_text = fan({{"Z", 3, 4}, {"Y", 3, 4}});
    CHECK(choose_hint(by_text.start_key, by_text, solve_quality(by_text, RewardConfig{})).target == "Y");
}

TEST_CASE("choose_hint: deletions are never suggested") {
    auto net = fan({{"D", 1, 0}});
    net.vertices["fan|G"] = VertexInfo{1, false, true, 3, false};
    net.edges[{net.start_key, "delete|A"}] = {"fan|G", 4};
    auto q = solve_quality(net, RewardConfig{});
    REQUIRE(q.at("fan|G").gqv > q.at("fan|D").gqv);
    CHECK(choose_hint(net.start_key, net, q).target == "D");
}

TEST_CASE("policy_decide") {
    PolicyConfig adaptive{PolicyMode::Adaptive, 0.0, 3};
    CHECK(policy_decide(adaptive, true, 0) == Decision::GiveProactive);
    CHECK(policy_decide(adaptive, true, 2) == Decision::GiveProactive);
    CHECK(policy_decide(adaptive, true, 3) == Decision::Withhold);
    CHECK(policy_decide(adaptive, false, 0) == Decision::Withhold);
    PolicyConfig control{PolicyMode::Control, 0.0, 3};
    CHECK(policy_decide(control, true, 0) == Decision::Withhold);
    PolicyConfig uncapped{PolicyMode::Adaptive, 0.0, std::nullopt};
    CHECK(policy_decide(uncapped, true, 1000) == Decision::GiveProactive);
    PolicyConfig random{PolicyMode::Random, 0.3, 3};
    CHECK(policy_decide(random, false, 0, 0.29) == Decision::GiveProactive);
    CHECK(policy_decide(random, false, 0, 0.30) == Decision::Withhold);
    CHECK(policy_decide(random, true, 3, 0.0) == Decision::Withhold);
}

TEST_CASE("policy config json") {
    PolicyConfig c{PolicyMode::Random, 0.25, std::nullopt};
    auto j = to_json(c);
    CHECK(j.at("max_consecutive_proactive") == -1);
    auto back = policy_config_from_json(j);
    CHECK(back.mode == PolicyMode::Random);
    CHECK(back.random_p == 0.25);
    CHECK_FALSE(back.max_consecutive_proactive.has_value());
    CHECK_THROWS_AS(policy_config_from_json(json{{"mode", "Sometimes"}}), ConfigError);
    CHECK_THROWS_AS(policy_config_from_json(json{{"random_p", 1.5}}), ConfigError);
    CHECK_THROWS_AS(policy_config_from_json(json{{"cap", 2}}), ConfigError);
}

TEST_CASE("simulator: expert students take shortest solutions") {
    PopulationSpec spec;
    spec.n_students = 6;
    spec.skill = {1.0, 1.0};
    spec.help_seek = {0.0, 0.0};
    Simulator sim(curriculum(), SimConfig{});
    auto out = sim.run(draw_population(spec, 3), PolicyConfig{}, TutorContext{&curriculum()});
    REQUIRE_FALSE(out.attempts.empty());
    for (const auto& a : out.attempts) {
        CAPTURE(a.problem_id);
        CHECK(a.completed);
        CHECK(static_cast<int>(a.state_changing_count()) == sim.solver(a.problem_id).shortest_length());
        for (const auto& r : a.records) CHECK(r.action.changes_state());
    }
}

TEST_CASE("simulator: random walkers under a tight cap leave attempts incomplete") {
    PopulationSpec spec;
    spec.n_students = 6;
    spec.skill = {0.0, 0.0};
    SimConfig cfg;
    cfg.cap_factor = 1.0;
    cfg.cap_extra = 0;
    auto out = simulate_population(curriculum(), spec, cfg, PolicyConfig{}, TutorContext{&curriculum()}, 5);
    long incomplete = 0;
    for (const auto& a : out.attempts) incomplete += !a.completed;
    CHECK(incomplete > 0);
}

TEST_CASE("simulator: same seed, same bytes") {
    PopulationSpec spec;
    spec.n_students = 8;
    auto a = simulate_population(curriculum(), spec, SimConfig{}, PolicyConfig{}, TutorContext{&curriculum()}, 42);
    auto b = simulate_population(curriculum(), spec, SimConfig{}, PolicyConfig{}, TutorContext{&curriculum()}, 42);
    CHECK(jsonl(a.attempts) == jsonl(b.attempts));
    auto c = simulate_population(curriculum(), spec, SimConfig{}, PolicyConfig{}, TutorContext{&curriculum()}, 43);
    CHECK(jsonl(a.attempts) != jsonl(c.attempts));
    // Students are independent: the first student's log does not depend on population size.
    spec.n_students = 3;
    auto d = simulate_population(curriculum(), spec, SimConfig{}, PolicyConfig{}, TutorContext{&curriculum()}, 42);
    auto first = [](const SimOutput& o) {
        std::vector<AttemptLog> v;
        for (const auto& x : o.attempts)
            if (x.student_id == o.students.front().id) v.push_back(x);
        return jsonl(v);
    };
    CHECK(first(a) == first(d));
}

TEST_CASE("simulator: ingested logs rebuild the same chain") {
    PopulationSpec spec;
    spec.n_students = 5;
    auto out = simulate_population(curriculum(), spec, SimConfig{}, PolicyConfig{PolicyMode::Random, 0.5, 3},
                                   TutorContext{&curriculum()}, 8);
    std::istringstream in(jsonl(out.attempts));
    auto back = ingest_attempts(in, curriculum());
    CHECK(jsonl(back) == jsonl(out.attempts));
}

TEST_CASE("help behavior: step definitions") {
    using O = StepObservation;
    auto avoid = summarize_steps("s", {O{false, true, false, false}});
    CHECK(avoid.possible_help_avoidance == 100.0);
    CHECK(avoid.possible_help_abuse == 0.0);
    auto abuse = summarize_steps("s", {O{false, false, true, true}});
    CHECK(abuse.possible_help_abuse == 100.0);
    CHECK(abuse.possible_help_avoidance == 0.0);
    auto all = summarize_steps("s", {O{true, true, true, false}, O{true, false, true, false}});
    CHECK(all.possible_help_appropriateness == 100.0);
    CHECK(all.possible_help_avoidance == 0.0);
    CHECK(all.hinted_proportion == 1.0);
    auto mixed = summarize_steps("s", {O{false, true, false, false}, O{false, false, false, false},
                                       O{true, true, true, false}, O{false, true, false, true}});
    CHECK(mixed.possible_help_avoidance == 25.0);
    CHECK(mixed.possible_help_appropriateness == 25.0);
    CHECK(sum(mixed.eight) == 4);
    CHECK(mixed.eight[eight_way_index(false, false, true)] == 2);
    CHECK(eight_way_label(eight_way_index(true, false, true)) == "pred-HN+noHints+obs-HN");
    auto none = summarize_steps("s", {});
    CHECK(none.possible_help_avoidance == 0.0);
}

TEST_CASE("help behavior: on-demand requests and hint accounting") {
    auto p = fixtures::chain_problem();
    ProblemSet ps({p});
    auto a = fixtures::scripted_attempt(p, "s", 0, {"B", "C"}, 20.0);
    StepRecord req = a.records[1];
    req.action = Action{};
    req.action.kind = ActionKind::HintRequest;
    req.post_state = req.pre_state;
    req.post_key = req.pre_key;
    req.duration_s = 5.0;
    StepRecord given = req;
    given.action.kind = ActionKind::HintGiven;
    given.action.hint_kind = HintKind::OnDemand;
    given.action.derived = "C";
    given.duration_s = 0.0;
    StepRecord just = a.records[1];
    just.action = Action{};
    just.action.kind = ActionKind::HintJustify;
    just.action.derived = "C";
    just.pre_state = just.post_state;
    just.pre_key = just.post_key;
    just.duration_s = 0.0;
    a.records = {a.records[0], req, given, a.records[1], just};
    for (std::size_t i = 0; i < a.records.size(); ++i) a.records[i].seq_no = static_cast<int>(i);

    QualityTables qt;
    qt.by_problem[p.id] = solve_quality(build_network({a}, p.id), RewardConfig{});
    DurationModel dur;
    dur.p75_seconds[p.id] = 100.0;
    std::vector<StepAnnotation> ann{{"s", p.id, 0, 1, 1, 0.9, true}};
    auto rep = evaluate_help_behavior({a}, ann, ps, qt, dur, EfficiencyMetric::GlobalAbsolute);
    REQUIRE(rep.students.size() == 1);
    const auto& b = rep.students[0];
    CHECK(b.steps == 2);
    CHECK(b.on_demand_hints == 1);
    CHECK(b.hint_requests == 1);
    CHECK(b.too_quick_requests == 1);
    CHECK(b.hints_justified == 1);
    CHECK(*b.hjr == 1.0);
    CHECK(b.possible_help_appropriateness == 50.0);
    CHECK(rep.eight[eight_way_index(true, true, false)] == 1);
    CHECK(rep.eight[eight_way_index(false, false, false)] == 1);
    CHECK(sum(rep.eight) == rep.state_changing_steps);
    CHECK_THROWS_AS(evaluate_help_behavior({a}, ann, ps, QualityTables{}, dur, EfficiencyMetric::GlobalAbsolute),
                    UnknownState);
}

TEST_CASE("experiment: identical conditions show no effect") {
    auto cfg = small_experiment();
    cfg.adaptive = PolicyConfig{PolicyMode::Control, 0.0, 3};
    auto rep = run_experiment(knowledge(), cfg, 7);
    CHECK(jsonl(rep.a.output.attempts) == jsonl(rep.b.output.attempts));
    REQUIRE_FALSE(rep.comparisons.empty());
    for (const auto& c : rep.comparisons) {
        CAPTURE(c.measure);
        CHECK(c.mean_a == c.mean_b);
        CHECK(c.mann_whitney.z == 0.0);
        CHECK(c.mann_whitney.p == doctest::Approx(1.0));
        CHECK(c.welch.t == 0.0);
    }
    CHECK(sum(rep.a.behavior.eight) == rep.a.behavior.state_changing_steps);
    long hinted = 0;
    for (const auto& b : rep.a.behavior.students) hinted += b.proactive_hints;
    CHECK(hinted == 0);
}

TEST_CASE("experiment: uncapped adaptive hints every predicted step") {
    TutorKnowledge tk = knowledge();
    tk.predictor = PredictorPair{always(Variant::StateBased, 1.0), always(Variant::StateFree, 1.0)};
    auto cfg = small_experiment();
    cfg.adaptive.max_consecutive_proactive = std::nullopt;
    auto rep = run_experiment(tk, cfg, 9);
    for (const auto* c : {&rep.a, &rep.b}) CHECK(sum(c->behavior.eight) == c->behavior.state_changing_steps);
    CHECK(rep.a.behavior.state_changing_steps > 0);
    CHECK(rep.a.behavior.eight[eight_way_index(true, false, false)] == 0);
    CHECK(rep.a.behavior.eight[eight_way_index(true, false, true)] == 0);
    CHECK(rep.b.behavior.eight[eight_way_index(true, false, false)] +
              rep.b.behavior.eight[eight_way_index(true, false, true)] >
          0);

    cfg.adaptive.max_consecutive_proactive = 1;
    auto capped = run_experiment(tk, cfg, 9);
    CHECK(capped.a.behavior.eight[eight_way_index(true, false, false)] +
              capped.a.behavior.eight[eight_way_index(true, false, true)] >
          0);
}

TEST_CASE("experiment: csv tables") {
    auto rep = run_experiment(knowledge(), small_experiment(), 3);
    auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
    CHECK(lines(step_class_csv(rep)) >= 6);
    CHECK(lines(eight_way_csv(rep)) == 17);
    CHECK(lines(histogram_csv(rep)) == 1 + 2 * 12);
    CHECK(lines(hint_csv(rep)) >= 3);
    auto j = to_json(rep);
    CHECK(j.contains("comparisons"));
}

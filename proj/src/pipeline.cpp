#include "helpneed/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "helpneed/errors.hpp"
#include "helpneed/fixtures.hpp"

namespace helpneed {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t x = master ^ (stream * 0x9e3779b97f4a7c15ULL);
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

PipelineConfig pipeline_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    PipelineConfig c;
    bool policy_given = false;
    for (const auto& [k, v] : j.items()) {
        if (k == "paths") {
            for (const auto& [pk, pv] : v.items()) {
                if (pk == "problems") c.paths.problems = pv.get<std::string>();
                else if (pk == "logs") c.paths.logs = pv.get<std::string>();
                else if (pk == "networks") c.paths.networks = pv.get<std::string>();
                else if (pk == "models") c.paths.models = pv.get<std::string>();
                else if (pk == "reports") c.paths.reports = pv.get<std::string>();
                else throw ConfigError("unknown paths key: " + pk);
            }
        } else if (k == "reward") {
            c.reward = reward_config_from_json(v);
        } else if (k == "metric") {
            c.metric = metric_from_string(v.get<std::string>());
        } else if (k == "predictor") {
            c.predictor = predictor_params_from_json(v);
        } else if (k == "policy") {
            c.policy = policy_config_from_json(v);
            policy_given = true;
        } else if (k == "historical") {
            c.historical = population_spec_from_json(v);
        } else if (k == "experiment") {
            c.experiment = experiment_config_from_json(v);
        } else if (k == "session_gap_s") {
            c.session_gap_s = v.get<double>();
        } else if (k == "seed") {
            c.seed = v.get<std::uint64_t>();
        } else {
            throw ConfigError("unknown config key: " + k);
        }
    }
    if (policy_given) c.experiment.adaptive = c.policy;
    else c.policy = c.experiment.adaptive;
    c.reward.validate();
    return c;
}

json to_json(const PipelineConfig& c) {
    return {{"paths",
             {{"problems", c.paths.problems},
              {"logs", c.paths.logs},
              {"networks", c.paths.networks},
              {"models", c.paths.models},
              {"reports", c.paths.reports}}},
            {"reward", to_json(c.reward)},
            {"metric", to_string(c.metric)},
            {"predictor", to_json(c.predictor)},
            {"policy", to_json(c.policy)},
            {"historical", to_json(c.historical)},
            {"experiment", to_json(c.experiment)},
            {"session_gap_s", c.session_gap_s},
            {"seed", c.seed}};
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    try {
        return pipeline_config_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

ProblemSet pipeline_problems(const PipelineConfig& c) {
    return c.paths.problems.empty() ? default_curriculum() : load_problem_set(c.paths.problems);
}

SimOutput generate_historical(const ProblemSet& problems, const PopulationSpec& spec, const SimConfig& sim,
                              std::uint64_t seed) {
    TutorContext ctx;
    ctx.problems = &problems;
    PolicyConfig control{PolicyMode::Control, 0.0, 3};
    return simulate_population(problems, spec, sim, control, ctx, seed);
}

TutorKnowledge build_knowledge(const ProblemSet& problems, const std::vector<AttemptLog>& attempts,
                               const RewardConfig& reward, EfficiencyMetric metric, double session_gap_s) {
    TutorKnowledge tk;
    tk.problems = &problems;
    tk.networks = build_networks(attempts);
    for (const auto& [pid, net] : tk.networks) tk.quality.by_problem[pid] = solve_quality(net, reward);
    tk.durations = fit_duration_model(attempts);
    tk.quartiles = step_quartiles(attempts);
    tk.metric = metric;
    tk.session_gap_s = session_gap_s;
    return tk;
}

std::vector<StepSample> training_samples(const TutorKnowledge& tk, const std::vector<AttemptLog>& attempts) {
    ExtractionContext ctx{tk.problems, &tk.quality, &tk.durations, tk.metric, tk.session_gap_s};
    std::vector<StepSample> out;
    for (auto& s : extract_corpus(attempts, ctx))
        if (tk.problems->at(s.problem).phase == Phase::Training) out.push_back(std::move(s));
    return out;
}

std::map<std::string, std::string> student_tags(const std::vector<SimStudent>& students) {
    std::map<std::string, std::string> out;
    for (const auto& s : students) out[s.id] = s.tag;
    return out;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << bytes;
}

std::string hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void record_stage(const PipelineConfig& c, const std::string& stage, const std::vector<std::string>& inputs,
                  const std::vector<std::string>& outputs) {
    const std::string path = c.paths.reports + "/stages.json";
    json all = json::object();
    if (fs::exists(path)) all = json::parse(read_file(path));
    json in = json::object(), out = json::object();
    for (const auto& p : inputs)
        if (fs::exists(p)) in[p] = hex(fnv1a64(read_file(p)));
    for (const auto& p : outputs) out[p] = hex(fnv1a64(read_file(p)));
    all[stage] = {{"inputs", in}, {"outputs", out}};
    write_file(path, all.dump(1) + "\n");
}

std::string logs_path(const PipelineConfig& c) { return c.paths.logs + "/historical.jsonl"; }
std::string students_path(const PipelineConfig& c) { return c.paths.logs + "/students.json"; }
std::string network_path(const PipelineConfig& c, const std::string& pid) { return c.paths.networks + "/" + pid + ".json"; }
std::string quality_path(const PipelineConfig& c, const std::string& pid) {
    return c.paths.networks + "/" + pid + ".quality.csv";
}

struct Loaded {
    ProblemSet problems;
    std::vector<AttemptLog> attempts;
    TutorKnowledge tk;
    std::map<std::string, std::string> tags;
    std::vector<std::string> inputs;
};

// Logs plus the stored networks and quality tables.
std::unique_ptr<Loaded> load_all(const PipelineConfig& c, bool need_models) {
    auto L = std::make_unique<Loaded>();
    L->problems = pipeline_problems(c);
    L->attempts = ingest_file(logs_path(c), L->problems);
    L->inputs.push_back(logs_path(c));
    L->tk.problems = &L->problems;
    for (const auto& p : L->problems.problems()) {
        const std::string np = network_path(c, p.id), qp = quality_path(c, p.id);
        if (!fs::exists(np)) continue;
        if (!fs::exists(qp)) throw Error("missing quality table " + qp + " (run solve)");
        L->tk.networks[p.id] = load_network(np);
        L->tk.quality.by_problem[p.id] = load_quality_csv(qp);
        L->inputs.push_back(np);
        L->inputs.push_back(qp);
    }
    if (L->tk.networks.empty()) throw Error("no networks under " + c.paths.networks + " (run build)");
    L->tk.durations = fit_duration_model(L->attempts);
    L->tk.quartiles = step_quartiles(L->attempts);
    L->tk.metric = c.metric;
    L->tk.session_gap_s = c.session_gap_s;
    if (fs::exists(students_path(c))) {
        for (const auto& s : json::parse(read_file(students_path(c))))
            L->tags[s.at("id").get<std::string>()] = s.at("tag").get<std::string>();
        L->inputs.push_back(students_path(c));
    }
    if (need_models) {
        PredictorPair pair{load_model(c.paths.models + "/state_based.json"),
                           load_model(c.paths.models + "/state_free.json")};
        L->tk.predictor = std::move(pair);
        L->inputs.push_back(c.paths.models + "/state_based.json");
        L->inputs.push_back(c.paths.models + "/state_free.json");
    }
    return L;
}

}  // namespace

void stage_gen(const PipelineConfig& c) {
    ProblemSet problems = pipeline_problems(c);
    SimOutput out = generate_historical(problems, c.historical, c.experiment.sim, derive_seed(c.seed, 1));
    std::ostringstream ss;
    write_jsonl(ss, out.attempts);
    write_file(logs_path(c), ss.str());
    json students = json::array();
    for (const auto& s : out.students)
        students.push_back({{"id", s.id},
                            {"tag", s.tag},
                            {"skill", s.skill},
                            {"hint_follow", s.hint_follow},
                            {"help_seek", s.help_seek},
                            {"speed", s.speed}});
    write_file(students_path(c), students.dump(1) + "\n");
    write_file(c.paths.logs + "/problems.json", to_json(problems).dump(1) + "\n");
    record_stage(c, "gen", {c.paths.problems}, {logs_path(c), students_path(c), c.paths.logs + "/problems.json"});
}

void stage_ingest(const PipelineConfig& c) {
    ProblemSet problems = pipeline_problems(c);
    auto attempts = ingest_file(logs_path(c), problems);
    std::map<std::string, int> per_problem, completed;
    std::size_t records = 0;
    std::set<std::string> students;
    for (const auto& a : attempts) {
        ++per_problem[a.problem_id];
        completed[a.problem_id] += a.completed ? 1 : 0;
        records += a.records.size();
        students.insert(a.student_id);
    }
    json j = {{"attempts", attempts.size()},
              {"records", records},
              {"students", students.size()},
              {"attempts_per_problem", per_problem},
              {"completed_per_problem", completed}};
    const std::string out = c.paths.reports + "/ingest.json";
    write_file(out, j.dump(1) + "\n");
    record_stage(c, "ingest", {logs_path(c)}, {out});
}

void stage_build(const PipelineConfig& c) {
    ProblemSet problems = pipeline_problems(c);
    auto attempts = ingest_file(logs_path(c), problems);
    std::vector<std::string> outs;
    for (const auto& [pid, net] : build_networks(attempts)) {
        const std::string p = network_path(c, pid);
        write_file(p, serialize_network(net));
        outs.push_back(p);
    }
    record_stage(c, "build", {logs_path(c)}, outs);
}

void solve_one(const RewardConfig& reward, const std::string& network_path, const std::string& out_path) {
    InteractionNetwork net = load_network(network_path);
    write_file(out_path, quality_csv(solve_quality(net, reward)));
}

void stage_solve(const PipelineConfig& c) {
    ProblemSet problems = pipeline_problems(c);
    std::vector<std::string> ins, outs;
    for (const auto& p : problems.problems()) {
        const std::string np = network_path(c, p.id);
        if (!fs::exists(np)) continue;
        solve_one(c.reward, np, quality_path(c, p.id));
        ins.push_back(np);
        outs.push_back(quality_path(c, p.id));
    }
    if (ins.empty()) throw Error("no networks under " + c.paths.networks + " (run build)");
    record_stage(c, "solve", ins, outs);
}

void stage_classify(const PipelineConfig& c) {
    auto L = load_all(c, false);
    std::string csv = classified_csv_header();
    for (const auto& a : L->attempts) {
        const QualityTable* q = L->tk.quality.find(a.problem_id);
        if (!q) continue;
        csv += classified_csv_rows(a, classify_attempt(a, *q, L->tk.durations, c.metric));
    }
    const std::string out = c.paths.reports + "/classified.csv", dur = c.paths.reports + "/durations.json";
    write_file(out, csv);
    write_file(dur, json{{"p75_seconds", L->tk.durations.p75_seconds}}.dump(1) + "\n");
    record_stage(c, "classify", L->inputs, {out, dur});
}

void stage_correlate(const PipelineConfig& c) {
    auto L = load_all(c, false);
    // Per student: share of inefficient training steps under each metric
    // against mean posttest optimality.
    std::map<std::string, std::vector<double>> opt;
    std::map<std::pair<std::string, std::string>, const AttemptLog*> last;
    for (const auto& a : L->attempts)
        if (L->problems.at(a.problem_id).phase == Phase::Posttest) last[{a.student_id, a.problem_id}] = &a;
    for (const auto& [key, a] : last) {
        double o = 0.0;
        auto qit = L->tk.quartiles.find(a->problem_id);
        if (a->completed && qit != L->tk.quartiles.end()) {
            double q1 = qit->second.first, q3 = qit->second.second;
            if (!(q3 > q1)) q3 = q1 + 1.0;
            o = optimality(static_cast<double>(a->state_changing_count()), q1, q3);
        }
        opt[key.first].push_back(o);
    }
    json metrics = json::object();
    for (EfficiencyMetric m : {EfficiencyMetric::GlobalAbsolute, EfficiencyMetric::GlobalRelative,
                               EfficiencyMetric::LocalAbsolute, EfficiencyMetric::LocalRelative}) {
        std::map<std::string, std::pair<double, double>> frac;
        for (const auto& a : L->attempts) {
            if (L->problems.at(a.problem_id).phase != Phase::Training) continue;
            const QualityTable* q = L->tk.quality.find(a.problem_id);
            if (!q) continue;
            for (const auto& s : classify_attempt(a, *q, L->tk.durations, m)) {
                auto& f = frac[a.student_id];
                f.second += 1;
                if (!(s.state_known && s.metric_value >= 0.0)) f.first += 1;
            }
        }
        std::vector<double> x, y;
        for (const auto& [sid, f] : frac) {
            if (opt[sid].empty() || f.second == 0) continue;
            x.push_back(f.first / f.second);
            y.push_back(mean(opt[sid]));
        }
        json entry = {{"n", x.size()}};
        try {
            auto r = pearson(x, y);
            entry["r"] = r.r;
            entry["t"] = r.t;
            entry["p"] = r.p;
        } catch (const Error& e) {
            entry["r"] = nullptr;
            entry["error"] = e.what();
        }
        metrics[to_string(m)] = entry;
    }
    const std::string out = c.paths.reports + "/correlation.json";
    write_file(out, json{{"inefficient_share_vs_post_optimality", metrics}}.dump(1) + "\n");
    record_stage(c, "correlate", L->inputs, {out});
}

namespace {

const char* variant_file(Variant v) { return v == Variant::StateBased ? "state_based" : "state_free"; }

}  // namespace

void stage_cv(const PipelineConfig& c) {
    auto L = load_all(c, false);
    auto samples = training_samples(L->tk, L->attempts);
    std::vector<std::string> outs;
    for (Variant v : {Variant::StateBased, Variant::StateFree}) {
        Dataset d = make_dataset(samples, v, L->tags);
        auto res = expert_weight_search(d, v, c.predictor, derive_seed(c.seed, 2));
        json reports = json::array();
        for (const auto& r : res.reports) reports.push_back(to_json(r));
        json j = {{"variant", to_string(v)},
                  {"rows", d.y.size()},
                  {"positives", std::count(d.y.begin(), d.y.end(), 1)},
                  {"chosen_multiplier", res.multiplier},
                  {"weights", {{"w0", res.weights.w0}, {"w1", res.weights.w1}}},
                  {"reports", reports}};
        const std::string out = c.paths.reports + "/cv_" + variant_file(v) + ".json";
        write_file(out, j.dump(1) + "\n");
        outs.push_back(out);
    }
    record_stage(c, "cv", L->inputs, outs);
}

void stage_train(const PipelineConfig& c) {
    auto L = load_all(c, false);
    auto samples = training_samples(L->tk, L->attempts);
    std::vector<std::string> outs, ins = L->inputs;
    for (Variant v : {Variant::StateBased, Variant::StateFree}) {
        double multiplier = 1.0;
        const std::string cv = c.paths.reports + "/cv_" + variant_file(v) + ".json";
        if (fs::exists(cv)) {
            multiplier = json::parse(read_file(cv)).at("chosen_multiplier").get<double>();
            ins.push_back(cv);
        }
        Dataset d = make_dataset(samples, v, L->tags);
        HelpNeedModel m = train_model(d, v, c.predictor, multiplier, derive_seed(c.seed, 3));
        const std::string out = c.paths.models + "/" + variant_file(v) + ".json";
        fs::create_directories(c.paths.models);
        save_model(m, out);
        outs.push_back(out);
    }
    record_stage(c, "train", ins, outs);
}

void stage_predict(const PipelineConfig& c) {
    auto L = load_all(c, true);
    auto samples = training_samples(L->tk, L->attempts);
    std::ostringstream csv;
    csv << "student,problem,attempt,seq,variant,probability,predicted,label\n";
    for (const auto& s : samples) {
        StepPrediction p = predict_step(*L->tk.predictor, s.row.values, s.row.state_known);
        csv << s.student << ',' << s.problem << ',' << s.attempt << ',' << s.seq_no << ',' << to_string(p.used) << ','
            << p.probability << ',' << p.label << ',' << s.label << '\n';
    }
    const std::string out = c.paths.reports + "/predictions.csv";
    write_file(out, csv.str());
    record_stage(c, "predict", L->inputs, {out});
}

void stage_simulate(const PipelineConfig& c) {
    auto L = load_all(c, true);
    ExperimentReport rep = run_experiment(L->tk, c.experiment, derive_seed(c.seed, 4));
    const std::string dir = c.paths.reports;
    std::vector<std::string> outs = {dir + "/experiment.json", dir + "/table_step_classes.csv",
                                     dir + "/table_hints.csv", dir + "/table_eight_way.csv",
                                     dir + "/hist_help.csv"};
    write_file(outs[0], to_json(rep).dump(1) + "\n");
    write_file(outs[1], step_class_csv(rep));
    write_file(outs[2], hint_csv(rep));
    write_file(outs[3], eight_way_csv(rep));
    write_file(outs[4], histogram_csv(rep));
    record_stage(c, "simulate", L->inputs, outs);
}

void stage_report(const PipelineConfig& c) {
    json summary = {{"config", to_json(c)}};
    for (const char* name : {"ingest.json", "correlation.json", "cv_state_based.json", "cv_state_free.json"}) {
        const std::string p = c.paths.reports + "/" + name;
        if (!fs::exists(p)) continue;
        json j = json::parse(read_file(p));
        if (j.contains("reports")) j.erase("reports");
        summary[name] = j;
    }
    const std::string exp = c.paths.reports + "/experiment.json";
    if (fs::exists(exp)) {
        json j = json::parse(read_file(exp));
        summary["experiment"] = {{"comparisons", j.at("comparisons")}};
        for (const auto& cond : j.at("conditions"))
            summary["experiment"][cond.at("name").get<std::string>()] = {
                {"class_totals", cond.at("class_totals")},
                {"eight_way", cond.at("help_behavior").at("eight_way")}};
    }
    const std::string stages = c.paths.reports + "/stages.json";
    if (fs::exists(stages)) summary["stages"] = json::parse(read_file(stages));
    const std::string out = c.paths.reports + "/summary.json";
    write_file(out, summary.dump(1) + "\n");
}

bool fixture_check(std::ostream& out) {
    bool all = true;
    auto line = [&](const std::string& name, bool ok, const std::string& detail) {
        out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
        all = all && ok;
    };
    RewardConfig cfg;

    auto gl = fixtures::goal_length_corpus();
    auto gnet = build_network(gl, gl.front().problem_id);
    std::vector<double> gr;
    for (const auto& [k, v] : goal_rewards(gnet, cfg)) gr.push_back(v);
    std::sort(gr.begin(), gr.end());
    std::ostringstream grs;
    for (double v : gr) grs << v << ' ';
    line("goal-rewards", gr == std::vector<double>{80.0, 95.0, 100.0}, grs.str());

    auto tt = fixtures::three_trajectory();
    auto net = build_network(tt.attempts, tt.problem.id);
    QualityTable q = solve_quality(net, cfg);
    const std::map<EfficiencyMetric, std::set<std::string>> expected = {
        {EfficiencyMetric::LocalAbsolute, {}},
        {EfficiencyMetric::LocalRelative, {"T_long-3"}},
        {EfficiencyMetric::GlobalRelative, {"T_medium-2", "T_long-3"}},
        {EfficiencyMetric::GlobalAbsolute, {"T_long-3", "T_long-4", "T_long-5", "T_long-6"}}};
    for (const auto& [m, want] : expected) {
        std::set<std::string> got;
        for (const auto& s : tt.steps)
            if (!is_efficient(m, progress(m, q, tt.start_key, s.pre_key, s.post_key))) got.insert(s.label);
        std::string detail;
        for (const auto& g : got) detail += g + " ";
        line(std::string("three-trajectory ") + to_string(m), got == want, detail.empty() ? "(none)" : detail);
    }
    return all;
}

}  // namespace helpneed

#include "helpneed/features.hpp"

#include <algorithm>
#include <map>

#include "helpneed/errors.hpp"

namespace helpneed {

namespace {

std::vector<std::string> make_names() {
    std::vector<std::string> n{"GAP",           "GRP",         "LAP",          "LRP",
                               "localPrevious", "globalPrevious", "localCurrent", "globalCurrent"};
    auto add = [&](const std::string& base, const std::string& levels) {
        for (char l : levels) n.push_back(std::string(1, l) + base);
    };
    add("Time", "spt");
    add("AvgStepTime", "pt");
    add("ActionCount", "spt");
    add("DirectProofActionCount", "spt");
    add("IndirectProofActionCount", "spt");
    add("DirectionChange", "spt");
    add("FDActionCount", "spt");
    add("BDActionCount", "spt");
    add("StepCount", "pt");
    add("SolSize", "p");
    add("RuleDescription", "spt");
    add("HintRequest", "spt");
    add("ProactiveHintCount", "spt");
    add("OnDemandHintCount", "spt");
    add("Deleted", "pt");
    add("RightApp", "pt");
    add("WrongApp", "spt");
    add("Accuracy", "spt");
    add("SessionCount", "t");
    add("NewSession", "p");
    add("Skips", "t");
    add("Restarts", "t");
    add("EasyProblems", "t");
    add("DifficultProblems", "t");
    return n;
}

double clicks(const StepRecord& r) {
    double base = 0.0;
    switch (r.action.kind) {
        case ActionKind::Derive: base = static_cast<double>(r.action.premises.size()) + 1.0; break;
        case ActionKind::Delete: base = 2.0; break;
        case ActionKind::HintRequest: base = 1.0; break;
        default: break;
    }
    return base + 2.0 * r.wrong_app_count;
}

double ratio(double right, double wrong) { return right + wrong > 0 ? right / (right + wrong) : 0.0; }

}  // namespace

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = make_names();
    return names;
}

std::size_t feature_index(const std::string& name) {
    const auto& n = feature_names();
    auto it = std::find(n.begin(), n.end(), name);
    if (it == n.end()) throw ManifestMismatch("unknown feature: " + name);
    return static_cast<std::size_t>(it - n.begin());
}

bool is_quality_feature(std::size_t index) { return index < kQualityFeatureCount; }

void FeatureTracker::begin_attempt(const std::string& problem_id, Difficulty difficulty, double start_ts) {
    bool new_session = !any_event_ || start_ts - last_ts_ > session_gap_s_;
    if (new_session && any_event_) ++sessions_before_;
    if (have_problem_ && problem_id == problem_) {
        if (!last_attempt_completed_) ++restarts_;
    } else {
        if (have_problem_ && !last_attempt_completed_) ++skips_;
        p_ = Counters{};
        new_session_problem_ = new_session;
    }
    if (new_session) new_session_problem_ = true;
    s_ = Counters{};
    pending_ = Counters{};
    problem_ = problem_id;
    have_problem_ = true;
    difficulty_ = difficulty;
    any_event_ = true;
    last_ts_ = std::max(last_ts_, start_ts);
}

void FeatureTracker::observe(const StepRecord& r) {
    Counters d;
    d.time = r.duration_s;
    d.actions = clicks(r);
    d.wrong = r.wrong_app_count;
    switch (r.action.kind) {
        case ActionKind::HintRequest: d.hint_requests = 1; break;
        case ActionKind::HintGiven: (r.action.hint_kind == HintKind::Proactive ? d.proactive : d.on_demand) = 1; break;
        case ActionKind::Delete: d.deleted = 1; d.steps = 1; break;
        case ActionKind::Derive: d.right = 1; d.steps = 1; break;
        case ActionKind::HintJustify: break;
    }
    auto add = [&](Counters& c) {
        c.time += d.time;
        c.steps += d.steps;
        c.actions += d.actions;
        c.hint_requests += d.hint_requests;
        c.proactive += d.proactive;
        c.on_demand += d.on_demand;
        c.deleted += d.deleted;
        c.right += d.right;
        c.wrong += d.wrong;
    };
    add(t_);
    add(p_);
    if (r.action.kind == ActionKind::HintJustify) {
        add(s_);
    } else {
        add(pending_);
        if (r.action.changes_state()) {
            s_ = pending_;
            pending_ = Counters{};
        }
    }
    last_ts_ = std::max(last_ts_, r.timestamp);
}

void FeatureTracker::end_attempt(bool completed) {
    last_attempt_completed_ = completed;
    if (completed) (difficulty_ == Difficulty::Easy ? easy_ : hard_) += 1;
}

FeatureRow FeatureTracker::features(const QualityTable* q, const std::string& start_key, const std::string& prev_key,
                                    const std::string& cur_key, std::size_t current_statements) const {
    FeatureRow row;
    row.values.reserve(feature_names().size());
    auto& v = row.values;
    row.state_known = q && q->contains(start_key) && q->contains(prev_key) && q->contains(cur_key);
    if (row.state_known) {
        const auto& st = q->at(start_key);
        const auto& pr = q->at(prev_key);
        const auto& cu = q->at(cur_key);
        v = {cu.gqv - st.gqv, cu.gqv - pr.gqv, cu.lqv - st.lqv, cu.lqv - pr.lqv, pr.lqv, pr.gqv, cu.lqv, cu.gqv};
    } else {
        v.assign(kQualityFeatureCount, 0.0);
    }
    auto spt = [&](double s, double p, double t) { v.insert(v.end(), {s, p, t}); };
    spt(s_.time, p_.time, t_.time);
    v.push_back(p_.steps > 0 ? p_.time / p_.steps : 0.0);
    v.push_back(t_.steps > 0 ? t_.time / t_.steps : 0.0);
    spt(s_.actions, p_.actions, t_.actions);
    spt(s_.actions, p_.actions, t_.actions);  // direct proof actions
    spt(0, 0, 0);                            // indirect proof actions
    spt(0, 0, 0);                            // direction changes
    spt(s_.actions, p_.actions, t_.actions);  // forward actions
    spt(0, 0, 0);                            // backward actions
    v.push_back(p_.steps);
    v.push_back(t_.steps);
    v.push_back(static_cast<double>(current_statements));
    spt(0, 0, 0);  // rule description clicks
    spt(s_.hint_requests, p_.hint_requests, t_.hint_requests);
    spt(s_.proactive, p_.proactive, t_.proactive);
    spt(s_.on_demand, p_.on_demand, t_.on_demand);
    v.push_back(p_.deleted);
    v.push_back(t_.deleted);
    v.push_back(p_.right);
    v.push_back(t_.right);
    spt(s_.wrong, p_.wrong, t_.wrong);
    spt(ratio(s_.right, s_.wrong), ratio(p_.right, p_.wrong), ratio(t_.right, t_.wrong));
    v.push_back(sessions_before_);
    v.push_back(new_session_problem_ ? 1.0 : 0.0);
    v.push_back(skips_);
    v.push_back(restarts_);
    v.push_back(easy_);
    v.push_back(hard_);
    return row;
}

std::vector<StepSample> extract_student(const std::vector<const AttemptLog*>& attempts, const ExtractionContext& ctx) {
    std::vector<StepSample> out;
    FeatureTracker tracker(ctx.session_gap_s);
    for (const AttemptLog* a : attempts) {
        if (a->records.empty()) continue;
        const Problem& prob = ctx.problems->at(a->problem_id);
        const auto& first = a->records.front();
        tracker.begin_attempt(a->problem_id, prob.difficulty, first.timestamp - first.duration_s);
        const QualityTable* q = ctx.quality ? ctx.quality->find(a->problem_id) : nullptr;
        auto groups = step_groups(*a);
        std::vector<ClassifiedStep> classes;
        if (q && ctx.durations) classes = classify_attempt(*a, *q, *ctx.durations, ctx.metric);
        const std::string start = a->start_key();
        std::string prev = start, cur = start;
        std::size_t n_statements = first.pre_state.size();
        std::size_t next_record = 0;
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const auto& g = groups[gi];
            StepSample s;
            s.student = a->student_id;
            s.problem = a->problem_id;
            s.attempt = a->attempt;
            s.seq_no = a->records[g.change_record].seq_no;
            s.group = gi;
            s.row = tracker.features(q, start, prev, cur, n_statements);
            if (!classes.empty()) {
                s.cls = classes[gi].cls;
                s.label = label_step(s.cls);
            }
            out.push_back(std::move(s));
            for (; next_record <= g.last_record; ++next_record) tracker.observe(a->records[next_record]);
            prev = g.pre_key;
            cur = g.post_key;
            n_statements = a->records[g.change_record].post_state.size();
        }
        for (; next_record < a->records.size(); ++next_record) tracker.observe(a->records[next_record]);
        tracker.end_attempt(a->completed);
    }
    return out;
}

std::vector<StepSample> extract_corpus(const std::vector<AttemptLog>& attempts, const ExtractionContext& ctx) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const AttemptLog*>> by_student;
    for (const auto& a : attempts) {
        auto [it, fresh] = by_student.try_emplace(a.student_id);
        if (fresh) order.push_back(a.student_id);
        it->second.push_back(&a);
    }
    std::vector<StepSample> out;
    for (const auto& sid : order) {
        auto& list = by_student[sid];
        std::stable_sort(list.begin(), list.end(), [](const AttemptLog* x, const AttemptLog* y) {
            double tx = x->records.empty() ? 0.0 : x->records.front().timestamp;
            double ty = y->records.empty() ? 0.0 : y->records.front().timestamp;
            return tx < ty;
        });
        auto rows = extract_student(list, ctx);
        out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    }
    return out;
}

}  // namespace helpneed

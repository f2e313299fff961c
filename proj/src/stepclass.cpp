#include "helpneed/stepclass.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "helpneed/errors.hpp"
#include "helpneed/stats.hpp"

namespace helpneed {

const char* to_string(EfficiencyMetric m) {
    switch (m) {
        case EfficiencyMetric::GlobalAbsolute: return "GlobalAbsolute";
        case EfficiencyMetric::GlobalRelative: return "GlobalRelative";
        case EfficiencyMetric::LocalAbsolute: return "LocalAbsolute";
        case EfficiencyMetric::LocalRelative: return "LocalRelative";
    }
    return "?";
}

EfficiencyMetric metric_from_string(const std::string& s) {
    for (auto m : {EfficiencyMetric::GlobalAbsolute, EfficiencyMetric::GlobalRelative, EfficiencyMetric::LocalAbsolute,
                   EfficiencyMetric::LocalRelative})
        if (s == to_string(m)) return m;
    throw ConfigError("unknown efficiency metric: " + s);
}

const char* to_string(StepClass c) {
    switch (c) {
        case StepClass::Expert: return "Expert";
        case StepClass::Strategic: return "Strategic";
        case StepClass::Opportunistic: return "Opportunistic";
        case StepClass::FarOff: return "FarOff";
        case StepClass::Futile: return "Futile";
    }
    return "?";
}

double DurationModel::threshold(const std::string& problem_id) const {
    auto it = p75_seconds.find(problem_id);
    if (it == p75_seconds.end()) throw InsufficientData("no duration threshold for problem " + problem_id);
    return it->second;
}

double duration_threshold(const std::vector<double>& durations) {
    if (durations.size() < 4) throw InsufficientData("duration threshold needs at least 4 steps");
    return percentile(durations, 0.75);
}

DurationModel fit_duration_model(const std::vector<AttemptLog>& attempts, DurationEstimator estimator) {
    std::map<std::string, std::vector<double>> samples;
    for (const auto& a : attempts) {
        auto groups = step_groups(a);
        if (groups.empty()) continue;
        auto& s = samples[a.problem_id];
        if (estimator == DurationEstimator::PerStep) {
            for (const auto& g : groups) s.push_back(g.duration_s);
        } else {
            double total = 0.0;
            for (const auto& g : groups) total += g.duration_s;
            s.push_back(total / static_cast<double>(groups.size()));
        }
    }
    DurationModel m;
    for (const auto& [pid, s] : samples) {
        if (s.size() < 4) continue;
        double t = duration_threshold(s);
        if (t > 0.0) m.p75_seconds[pid] = t;
    }
    return m;
}

double progress(EfficiencyMetric metric, const QualityTable& q, const std::string& start_key,
                const std::string& pre_key, const std::string& post_key) {
    const auto& post = q.at(post_key);
    switch (metric) {
        case EfficiencyMetric::GlobalAbsolute: return post.gqv - q.at(start_key).gqv;
        case EfficiencyMetric::GlobalRelative: return post.gqv - q.at(pre_key).gqv;
        case EfficiencyMetric::LocalAbsolute: return post.lqv - q.at(start_key).lqv;
        case EfficiencyMetric::LocalRelative: return post.lqv - q.at(pre_key).lqv;
    }
    return 0.0;
}

std::vector<StepClass> classify_sequence(const std::vector<std::pair<bool, bool>>& steps) {
    std::vector<StepClass> out;
    bool in_run = false;
    for (auto [is_long, efficient] : steps) {
        if (efficient) {
            out.push_back(is_long ? StepClass::Strategic : StepClass::Expert);
            in_run = false;
        } else if (is_long) {
            out.push_back(StepClass::Futile);
            in_run = false;
        } else {
            out.push_back(in_run ? StepClass::FarOff : StepClass::Opportunistic);
            in_run = true;
        }
    }
    return out;
}

std::vector<ClassifiedStep> classify_attempt(const AttemptLog& attempt, const QualityTable& q,
                                             const DurationModel& dur, EfficiencyMetric metric) {
    auto groups = step_groups(attempt);
    std::vector<ClassifiedStep> out;
    std::vector<std::pair<bool, bool>> flags;
    const std::string start = attempt.start_key();
    const double limit = dur.threshold(attempt.problem_id);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& g = groups[i];
        ClassifiedStep c;
        c.group = i;
        c.seq_no = attempt.records[g.change_record].seq_no;
        c.duration_s = g.duration_s;
        c.is_long = g.duration_s > limit;
        c.state_known = q.contains(start) && q.contains(g.pre_key) && q.contains(g.post_key);
        bool efficient = false;
        if (c.state_known) {
            c.metric_value = progress(metric, q, start, g.pre_key, g.post_key);
            efficient = is_efficient(metric, c.metric_value);
        } else {
            c.metric_value = std::numeric_limits<double>::quiet_NaN();
        }
        flags.emplace_back(c.is_long, efficient);
        out.push_back(c);
    }
    auto classes = classify_sequence(flags);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].cls = classes[i];
    return out;
}

const QualityTable* QualityTables::find(const std::string& problem_id) const {
    auto it = by_problem.find(problem_id);
    return it == by_problem.end() ? nullptr : &it->second;
}

std::string classified_csv_header() { return "student,problem,seq,class,metric_value,duration_s,is_long\n"; }

std::string classified_csv_rows(const AttemptLog& attempt, const std::vector<ClassifiedStep>& steps) {
    std::string out;
    char buf[160];
    for (const auto& s : steps) {
        std::string mv = "NA";
        if (!std::isnan(s.metric_value)) {
            std::snprintf(buf, sizeof buf, "%.10g", s.metric_value);
            mv = buf;
        }
        std::snprintf(buf, sizeof buf, ",%d,%s,%s,%.6g,%d\n", s.seq_no, to_string(s.cls), mv.c_str(), s.duration_s,
                      s.is_long ? 1 : 0);
        out += attempt.student_id + "," + attempt.problem_id + buf;
    }
    return out;
}

double optimality(double steps, double q1, double q3) {
    if (q3 == q1) throw DegenerateQuartiles("optimality: q3 equals q1");
    if (!(q3 > q1)) throw DegenerateQuartiles("optimality: q3 must exceed q1");
    double n = std::max(0.0, (steps - q1) / (q3 - q1));
    return std::exp(-n);
}

double capped_time(const std::vector<double>& durations_s) {
    double total = 0.0;
    for (double d : durations_s) total += std::min(d, 60.0);
    return total / 60.0;
}

std::optional<double> accuracy(long right_apps, long wrong_apps) {
    if (right_apps + wrong_apps <= 0) return std::nullopt;
    return static_cast<double>(right_apps) / static_cast<double>(right_apps + wrong_apps);
}

std::optional<double> hjr(long hints_given, long hints_justified) {
    if (hints_given <= 0) return std::nullopt;
    return static_cast<double>(hints_justified) / static_cast<double>(hints_given);
}

}  // namespace helpneed

#include "helpneed/quality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "helpneed/errors.hpp"

namespace helpneed {

using nlohmann::json;

void RewardConfig::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0,1)");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (!(grade_floor < goal_reward)) throw ConfigError("grade_floor must be below goal_reward");
    if (max_iterations <= 0) throw ConfigError("max_iterations must be positive");
}

json to_json(const RewardConfig& c) {
    return {{"goal_reward", c.goal_reward},       {"error_penalty", c.error_penalty},
            {"penalize_dead_ends", c.penalize_dead_ends}, {"action_cost", c.action_cost},
            {"grade_floor", c.grade_floor},       {"gamma", c.gamma},
            {"tolerance", c.tolerance},           {"max_iterations", c.max_iterations}};
}

RewardConfig reward_config_from_json(const json& j) {
    RewardConfig c;
    for (const auto& [k, v] : j.items()) {
        if (k == "goal_reward") c.goal_reward = v.get<double>();
        else if (k == "error_penalty") c.error_penalty = v.get<double>();
        else if (k == "penalize_dead_ends") c.penalize_dead_ends = v.get<bool>();
        else if (k == "action_cost") c.action_cost = v.get<double>();
        else if (k == "grade_floor") c.grade_floor = v.get<double>();
        else if (k == "gamma") c.gamma = v.get<double>();
        else if (k == "tolerance") c.tolerance = v.get<double>();
        else if (k == "max_iterations") c.max_iterations = v.get<long>();
        else throw ConfigError("unknown reward key: " + k);
    }
    c.validate();
    return c;
}

const QualityEntry& QualityTable::at(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw UnknownState(key);
    return it->second;
}

CompiledNetwork::CompiledNetwork(const InteractionNetwork& net) {
    for (const auto& [key, v] : net.vertices) {
        index.emplace(key, keys.size());
        keys.push_back(key);
        absorbing.push_back(v.absorbing());
    }
    successors.resize(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i)
        for (const auto& s : net.successors(keys[i])) successors[i].emplace_back(index.at(s.to_key), s.probability);
}

std::map<std::string, double> goal_rewards(const InteractionNetwork& net, const RewardConfig& cfg) {
    std::vector<std::pair<int, long>> goals;
    for (const auto& [key, v] : net.vertices)
        if (v.is_goal) goals.emplace_back(v.solution_length, std::max(1L, v.visit_count));
    if (goals.empty()) throw NoGoal("network " + net.problem_id + " has no goal vertex");

    std::vector<int> lengths;
    for (auto [len, n] : goals) lengths.insert(lengths.end(), static_cast<std::size_t>(n), len);
    std::sort(lengths.begin(), lengths.end());
    const std::size_t n = lengths.size();
    double median = n % 2 ? lengths[n / 2] : 0.5 * (lengths[n / 2 - 1] + lengths[n / 2]);
    double shortest = lengths.front();
    double delta_median = median - shortest;
    double p = delta_median > 0 ? (cfg.goal_reward - cfg.grade_floor) / delta_median : 0.0;

    std::map<std::string, double> out;
    for (const auto& [key, v] : net.vertices) {
        if (!v.is_goal) continue;
        double delta = v.solution_length - shortest;
        out[key] = std::max(0.0, cfg.goal_reward - p * delta);
    }
    return out;
}

std::vector<double> local_rewards(const InteractionNetwork& net, const CompiledNetwork& cn, const RewardConfig& cfg) {
    std::vector<double> r(cn.size());
    for (std::size_t i = 0; i < cn.size(); ++i) {
        const VertexInfo& v = net.vertices.at(cn.keys[i]);
        r[i] = v.is_goal ? cfg.goal_reward : v.is_dead_end ? cfg.dead_end_reward() : cfg.action_cost;
    }
    return r;
}

std::vector<double> global_rewards(const InteractionNetwork& net, const CompiledNetwork& cn, const RewardConfig& cfg,
                                   const std::map<std::string, double>& gr) {
    std::vector<double> r(cn.size());
    for (std::size_t i = 0; i < cn.size(); ++i) {
        const VertexInfo& v = net.vertices.at(cn.keys[i]);
        r[i] = v.is_goal ? gr.at(cn.keys[i]) : v.is_dead_end ? cfg.dead_end_reward() : cfg.action_cost;
    }
    return r;
}

std::vector<double> apply_backup(Backup kind, const CompiledNetwork& cn, const std::vector<double>& rewards,
                                 double gamma, const std::vector<double>& v) {
    std::vector<double> out(cn.size());
    for (std::size_t i = 0; i < cn.size(); ++i) {
        const auto& succ = cn.successors[i];
        if (cn.absorbing[i] || succ.empty()) {
            out[i] = rewards[i];
            continue;
        }
        double acc;
        if (kind == Backup::Local) {
            acc = v[succ.front().first];
            for (const auto& [j, p] : succ) acc = std::max(acc, v[j]);
        } else {
            acc = 0.0;
            for (const auto& [j, p] : succ) acc += p * v[j];
        }
        out[i] = rewards[i] + gamma * acc;
    }
    return out;
}

IterationResult value_iteration(Backup kind, const CompiledNetwork& cn, const std::vector<double>& rewards,
                                const RewardConfig& cfg, std::vector<double> init) {
    cfg.validate();
    if (init.empty()) init.assign(cn.size(), 0.0);
    if (init.size() != cn.size()) throw Error("initial value vector has wrong size");
    IterationResult res;
    res.values = std::move(init);
    const double scale = cfg.gamma / (1.0 - cfg.gamma);
    for (long it = 1; it <= cfg.max_iterations; ++it) {
        std::vector<double> next = apply_backup(kind, cn, rewards, cfg.gamma, res.values);
        double delta = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) delta = std::max(delta, std::abs(next[i] - res.values[i]));
        res.values = std::move(next);
        res.iterations = it;
        res.final_residual = delta;
        if (scale * delta <= cfg.tolerance) return res;
    }
    throw NonConvergence(cfg.max_iterations);
}

namespace {

std::map<std::string, double> to_map(const CompiledNetwork& cn, const std::vector<double>& v) {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < cn.size(); ++i) out.emplace(cn.keys[i], v[i]);
    return out;
}

}  // namespace

std::map<std::string, double> local_quality(const InteractionNetwork& net, const RewardConfig& cfg) {
    CompiledNetwork cn(net);
    return to_map(cn, value_iteration(Backup::Local, cn, local_rewards(net, cn, cfg), cfg).values);
}

std::map<std::string, double> global_quality(const InteractionNetwork& net, const RewardConfig& cfg,
                                             const std::map<std::string, double>& gr) {
    CompiledNetwork cn(net);
    return to_map(cn, value_iteration(Backup::Global, cn, global_rewards(net, cn, cfg, gr), cfg).values);
}

QualityTable solve_quality(const InteractionNetwork& net, const RewardConfig& cfg) {
    CompiledNetwork cn(net);
    auto gr = goal_rewards(net, cfg);
    auto loc = value_iteration(Backup::Local, cn, local_rewards(net, cn, cfg), cfg);
    auto glo = value_iteration(Backup::Global, cn, global_rewards(net, cn, cfg, gr), cfg);
    QualityTable q;
    for (std::size_t i = 0; i < cn.size(); ++i) q.values[cn.keys[i]] = {loc.values[i], glo.values[i]};
    q.iterations_local = loc.iterations;
    q.iterations_global = glo.iterations;
    q.final_residual_local = loc.final_residual;
    q.final_residual_global = glo.final_residual;
    return q;
}

bool contraction_check(const InteractionNetwork& net, const RewardConfig& cfg, const std::vector<double>& v1,
                       const std::vector<double>& v2, Backup kind, double slack) {
    CompiledNetwork cn(net);
    if (v1.size() != cn.size() || v2.size() != cn.size()) throw Error("value vectors must cover every state");
    auto rewards = kind == Backup::Local ? local_rewards(net, cn, cfg) : global_rewards(net, cn, cfg, goal_rewards(net, cfg));
    auto b1 = apply_backup(kind, cn, rewards, cfg.gamma, v1);
    auto b2 = apply_backup(kind, cn, rewards, cfg.gamma, v2);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < cn.size(); ++i) {
        lhs = std::max(lhs, std::abs(b1[i] - b2[i]));
        rhs = std::max(rhs, std::abs(v1[i] - v2[i]));
    }
    return lhs <= cfg.gamma * rhs + slack;
}

std::string quality_csv(const QualityTable& q) {
    std::string out = "state_key,lqv,gqv\n";
    char buf[64];
    for (const auto& [key, e] : q.values) {
        out += key;
        std::snprintf(buf, sizeof buf, ",%.17g", e.lqv);
        out += buf;
        std::snprintf(buf, sizeof buf, ",%.17g\n", e.gqv);
        out += buf;
    }
    return out;
}

void save_quality_csv(const QualityTable& q, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << quality_csv(q);
}

QualityTable load_quality_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open quality table: " + path);
    QualityTable q;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (n == 1) {
            if (line != "state_key,lqv,gqv") throw ValidationError(path + ":1: unexpected header");
            continue;
        }
        if (line.empty()) continue;
        auto c2 = line.rfind(',');
        auto c1 = c2 == std::string::npos ? c2 : line.rfind(',', c2 - 1);
        if (c1 == std::string::npos) throw ValidationError(path + ":" + std::to_string(n) + ": expected 3 columns");
        try {
            q.values[line.substr(0, c1)] = {std::stod(line.substr(c1 + 1, c2 - c1 - 1)), std::stod(line.substr(c2 + 1))};
        } catch (const std::exception&) {
            throw ValidationError(path + ":" + std::to_string(n) + ": bad number");
        }
    }
    return q;
}

}  // namespace helpneed

#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "helpneed/network.hpp"

namespace helpneed {

struct RewardConfig {
    double goal_reward = 100.0;
    double error_penalty = -10.0;
    bool penalize_dead_ends = false;
    double action_cost = -1.0;
    double grade_floor = 80.0;
    double gamma = 0.9;
    double tolerance = 1e-9;
    long max_iterations = 100000;

    void validate() const;
    double dead_end_reward() const { return penalize_dead_ends ? error_penalty : 0.0; }
};

nlohmann::json to_json(const RewardConfig& c);
RewardConfig reward_config_from_json(const nlohmann::json& j);

struct QualityEntry {
    double lqv = 0.0;
    double gqv = 0.0;
};

struct QualityTable {
    std::map<std::string, QualityEntry> values;
    long iterations_local = 0;
    long iterations_global = 0;
    double final_residual_local = 0.0;
    double final_residual_global = 0.0;

    bool contains(const std::string& key) const { return values.count(key) != 0; }
    const QualityEntry& at(const std::string& key) const;
};

// Dense view of a network used by the backups: vertices in key order.
struct CompiledNetwork {
    std::vector<std::string> keys;
    std::vector<bool> absorbing;
    std::vector<std::vector<std::pair<std::size_t, double>>> successors;  // (index, P(s'|s))
    std::map<std::string, std::size_t> index;

    explicit CompiledNetwork(const InteractionNetwork& net);
    std::size_t size() const { return keys.size(); }
};

std::map<std::string, double> goal_rewards(const InteractionNetwork& net, const RewardConfig& cfg);

// Per-state immediate rewards R(s) for the local and global value functions.
std::vector<double> local_rewards(const InteractionNetwork& net, const CompiledNetwork& cn, const RewardConfig& cfg);
std::vector<double> global_rewards(const InteractionNetwork& net, const CompiledNetwork& cn, const RewardConfig& cfg,
                                   const std::map<std::string, double>& gr);

enum class Backup { Local, Global };

// One synchronous application of the backup operator.
std::vector<double> apply_backup(Backup kind, const CompiledNetwork& cn, const std::vector<double>& rewards,
                                 double gamma, const std::vector<double>& v);

struct IterationResult {
    std::vector<double> values;
    long iterations = 0;
    double final_residual = 0.0;
};

// Jacobi value iteration from `init`. Stops once gamma/(1-gamma) times the
// max-norm update is within tolerance, which bounds the distance to the
// fixed point by the tolerance.
IterationResult value_iteration(Backup kind, const CompiledNetwork& cn, const std::vector<double>& rewards,
                                const RewardConfig& cfg, std::vector<double> init = {});

std::map<std::string, double> local_quality(const InteractionNetwork& net, const RewardConfig& cfg);
std::map<std::string, double> global_quality(const InteractionNetwork& net, const RewardConfig& cfg,
                                             const std::map<std::string, double>& gr);
QualityTable solve_quality(const InteractionNetwork& net, const RewardConfig& cfg);

// True iff the global backup contracts v1, v2 by at least gamma in max norm
// (with `slack` absolute allowance for rounding).
bool contraction_check(const InteractionNetwork& net, const RewardConfig& cfg, const std::vector<double>& v1,
                       const std::vector<double>& v2, Backup kind = Backup::Global, double slack = 1e-9);

std::string quality_csv(const QualityTable& q);
void save_quality_csv(const QualityTable& q, const std::string& path);
QualityTable load_quality_csv(const std::string& path);

}  // namespace helpneed

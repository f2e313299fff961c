// Independent reference computations shared by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "helpneed/quality.hpp"

namespace oracle {

using helpneed::CompiledNetwork;
using helpneed::InteractionNetwork;

// Solves (I - gamma P) v = r with absorbing rows pinned to r.
inline std::vector<double> linear_gqv(const InteractionNetwork& net, const helpneed::RewardConfig& cfg) {
    CompiledNetwork cn(net);
    const auto n = static_cast<Eigen::Index>(cn.size());
    auto r = helpneed::global_rewards(net, cn, cfg, helpneed::goal_rewards(net, cfg));
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        b(i) = r[static_cast<std::size_t>(i)];
        if (cn.absorbing[static_cast<std::size_t>(i)]) continue;
        for (auto [j, p] : cn.successors[static_cast<std::size_t>(i)]) a(i, static_cast<Eigen::Index>(j)) -= cfg.gamma * p;
    }
    Eigen::VectorXd v = a.partialPivLu().solve(b);
    return {v.data(), v.data() + n};
}

// Max over every deterministic successor choice of the induced linear system.
inline std::vector<double> enumerated_lqv(const InteractionNetwork& net, const helpneed::RewardConfig& cfg) {
    CompiledNetwork cn(net);
    const std::size_t n = cn.size();
    auto r = helpneed::local_rewards(net, cn, cfg);
    std::vector<std::size_t> choice(n, 0);
    std::vector<double> best(n, -INFINITY);
    for (;;) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        Eigen::VectorXd b(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            b(static_cast<Eigen::Index>(i)) = r[i];
            if (cn.absorbing[i] || cn.successors[i].empty()) continue;
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cn.successors[i][choice[i]].first)) -= cfg.gamma;
        }
        Eigen::VectorXd v = a.partialPivLu().solve(b);
        for (std::size_t i = 0; i < n; ++i) best[i] = std::max(best[i], v(static_cast<Eigen::Index>(i)));
        std::size_t k = 0;
        for (; k < n; ++k) {
            if (cn.absorbing[k] || cn.successors[k].empty()) continue;
            if (++choice[k] < cn.successors[k].size()) break;
            choice[k] = 0;
        }
        if (k == n) break;
    }
    return best;
}

// Random network: state 0 is the start, some goals, some dead ends, cycles allowed.
inline InteractionNetwork random_network(std::mt19937_64& rng, std::size_t n_states, int max_out) {
    InteractionNetwork net;
    net.problem_id = "rnd";
    std::uniform_int_distribution<int> deg(1, max_out);
    std::uniform_int_distribution<long> cnt(1, 5);
    auto key = [](std::size_t i) { return "rnd|S" + std::to_string(100 + i); };
    net.start_key = key(0);
    std::vector<bool> absorbing(n_states, false);
    for (std::size_t i = 1; i < n_states; ++i) {
        double u = std::uniform_real_distribution<double>(0, 1)(rng);
        helpneed::VertexInfo v;
        v.visit_count = cnt(rng);
        if (u < 0.3 || i == n_states - 1) {
            v.is_goal = true;
            v.solution_length = std::uniform_int_distribution<int>(3, 9)(rng);
            absorbing[i] = true;
        } else if (u < 0.45) {
            v.is_dead_end = true;
            absorbing[i] = true;
        }
        net.vertices[key(i)] = v;
    }
    net.vertices[key(0)].is_start = true;
    net.vertices[key(0)].visit_count = 5;
    for (std::size_t i = 0; i < n_states; ++i) {
        if (absorbing[i]) continue;
        int d = deg(rng);
        for (int e = 0; e < d; ++e) {
            std::size_t to = std::uniform_int_distribution<std::size_t>(1, n_states - 1)(rng);
            if (to == i) continue;
            net.edges[{key(i), "derive|MP|x|" + std::to_string(e)}] = {key(to), cnt(rng)};
        }
        if (net.successors(key(i)).empty())
            net.edges[{key(i), "derive|MP|x|goal"}] = {key(n_states - 1), 1};
    }
    return net;
}

}  // namespace oracle

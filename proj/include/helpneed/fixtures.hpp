#pragma once

#include <map>
#include <string>
#include <vector>

#include "helpneed/log.hpp"
#include "helpneed/network.hpp"
#include "helpneed/problem.hpp"

namespace helpneed::fixtures {

// Replays a scripted attempt. Each entry is a statement to derive (the first
// legal derivation producing it is used) or "-X" to delete statement X.
AttemptLog scripted_attempt(const Problem& problem, const std::string& student, int attempt,
                            const std::vector<std::string>& path, double step_seconds = 20.0,
                            double start_ts = 0.0);

Problem fig3_problem();

struct DesignatedStep {
    std::string label;  // e.g. "T_long-3"
    std::string pre_key;
    std::string post_key;
};

struct ThreeTrajectory {
    Problem problem;
    std::vector<AttemptLog> attempts;
    std::vector<DesignatedStep> steps;  // T_short-1..4, T_medium-1..5, T_long-1..8
    std::string start_key;
};

// Three reconstructed trajectories plus synthetic completions and abandoned
// branches whose counts fix the transition probabilities.
ThreeTrajectory three_trajectory();

// Corpus whose completed attempts have solution lengths 4, 5, 8, 8, 8.
std::vector<AttemptLog> goal_length_corpus();

Problem chain_problem();
// start -> s1 -> goal, one attempt.
std::vector<AttemptLog> chain_corpus();
// One attempt to the goal, one abandoned after a different first step.
std::vector<AttemptLog> branch_corpus();
// Attempts that delete and re-derive, producing cycles.
std::vector<AttemptLog> cycle_corpus();

struct NamedNetwork {
    std::string name;
    InteractionNetwork net;
};

// The five fixture networks used by the convergence checks.
std::vector<NamedNetwork> fixture_networks();

}  // namespace helpneed::fixtures

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "helpneed/log.hpp"

namespace helpneed {

struct VertexInfo {
    long visit_count = 0;
    bool is_start = false;
    bool is_goal = false;
    int solution_length = 0;  // derivations in a goal state, 0 otherwise
    bool is_dead_end = false;

    bool absorbing() const { return is_goal || is_dead_end; }
    friend bool operator==(const VertexInfo&, const VertexInfo&) = default;
};

struct EdgeInfo {
    std::string to_key;
    long traversal_count = 0;
    friend bool operator==(const EdgeInfo&, const EdgeInfo&) = default;
};

struct Successor {
    std::string to_key;
    long count = 0;
    double probability = 0.0;
};

class InteractionNetwork {
public:
    using EdgeKey = std::pair<std::string, std::string>;  // (from_key, action_signature)

    std::string problem_id;
    std::string start_key;
    std::map<std::string, VertexInfo> vertices;
    std::map<EdgeKey, EdgeInfo> edges;

    const VertexInfo* find(const std::string& key) const;
    // Successor states with summed counts; empty for absorbing vertices.
    std::vector<Successor> successors(const std::string& key) const;
    // Outgoing DERIVE edges as (signature, edge).
    std::vector<std::pair<std::string, EdgeInfo>> out_edges(const std::string& key) const;

    friend bool operator==(const InteractionNetwork&, const InteractionNetwork&) = default;
};

std::string action_signature(const StepRecord& r);
// The derived statement encoded in a derive signature, empty for deletions.
std::string signature_derived(const std::string& signature);
bool signature_is_derive(const std::string& signature);

InteractionNetwork build_network(const std::vector<AttemptLog>& attempts, const std::string& problem_id);
// Builds one network per problem that has attempts.
std::map<std::string, InteractionNetwork> build_networks(const std::vector<AttemptLog>& attempts);

std::string serialize_network(const InteractionNetwork& net);
InteractionNetwork deserialize_network(const std::string& bytes);

void save_network(const InteractionNetwork& net, const std::string& path);
InteractionNetwork load_network(const std::string& path);

}  // namespace helpneed

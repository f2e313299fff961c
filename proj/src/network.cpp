#include "helpneed/network.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "helpneed/errors.hpp"

namespace helpneed {

using nlohmann::json;

const VertexInfo* InteractionNetwork::find(const std::string& key) const {
    auto it = vertices.find(key);
    return it == vertices.end() ? nullptr : &it->second;
}

std::vector<Successor> InteractionNetwork::successors(const std::string& key) const {
    std::vector<Successor> out;
    const VertexInfo* v = find(key);
    if (!v || v->absorbing()) return out;
    long total = 0;
    for (auto it = edges.lower_bound({key, std::string{}}); it != edges.end() && it->first.first == key; ++it) {
        total += it->second.traversal_count;
        auto s = std::find_if(out.begin(), out.end(), [&](const Successor& x) { return x.to_key == it->second.to_key; });
        if (s == out.end()) out.push_back({it->second.to_key, it->second.traversal_count, 0.0});
        else s->count += it->second.traversal_count;
    }
    for (auto& s : out) s.probability = static_cast<double>(s.count) / static_cast<double>(total);
    std::sort(out.begin(), out.end(), [](const Successor& a, const Successor& b) { return a.to_key < b.to_key; });
    return out;
}

std::vector<std::pair<std::string, EdgeInfo>> InteractionNetwork::out_edges(const std::string& key) const {
    std::vector<std::pair<std::string, EdgeInfo>> out;
    for (auto it = edges.lower_bound({key, std::string{}}); it != edges.end() && it->first.first == key; ++it)
        if (signature_is_derive(it->first.second)) out.emplace_back(it->first.second, it->second);
    return out;
}

std::string action_signature(const StepRecord& r) {
    const Action& a = r.action;
    if (a.kind == ActionKind::Delete) return "delete|" + r.pre_state.at(a.premises.at(0));
    std::string sig = std::string("derive|") + rule_name(*a.rule) + "|";
    for (std::size_t i = 0; i < a.premises.size(); ++i) {
        if (i) sig += ',';
        sig += r.pre_state.at(a.premises[i]);
    }
    return sig + "|" + a.derived;
}

bool signature_is_derive(const std::string& signature) { return signature.rfind("derive|", 0) == 0; }

std::string signature_derived(const std::string& signature) {
    if (!signature_is_derive(signature)) return {};
    return signature.substr(signature.rfind('|') + 1);
}

InteractionNetwork build_network(const std::vector<AttemptLog>& attempts, const std::string& problem_id) {
    InteractionNetwork net;
    net.problem_id = problem_id;
    std::set<std::string> final_incomplete;
    bool any = false;
    for (const auto& a : attempts) {
        if (a.problem_id != problem_id || a.records.empty()) continue;
        any = true;
        const auto& first = a.records.front();
        const std::size_t n_givens = first.pre_state.size();
        if (net.start_key.empty()) net.start_key = first.pre_key;
        else if (net.start_key != first.pre_key) throw ValidationError("attempts of " + problem_id + " disagree on the start state");

        auto visit = [&](const std::string& key, const std::vector<std::string>& stmts) -> VertexInfo& {
            VertexInfo& v = net.vertices[key];
            ++v.visit_count;
            if (!a.conclusion.empty() && std::find(stmts.begin(), stmts.end(), a.conclusion) != stmts.end()) {
                v.is_goal = true;
                v.solution_length = static_cast<int>(stmts.size() - n_givens);
            }
            return v;
        };
        VertexInfo& s = visit(first.pre_key, first.pre_state);
        s.is_start = true;
        std::string cur = first.pre_key;
        bool at_goal = s.is_goal;
        for (const auto& r : a.records) {
            if (at_goal) break;
            if (!r.action.changes_state()) continue;
            EdgeInfo& e = net.edges[{r.pre_key, action_signature(r)}];
            if (e.traversal_count > 0 && e.to_key != r.post_key)
                throw ValidationError("nondeterministic action in " + problem_id + ": " + action_signature(r));
            e.to_key = r.post_key;
            ++e.traversal_count;
            at_goal = visit(r.post_key, r.post_state).is_goal;
            cur = r.post_key;
        }
        if (!at_goal) final_incomplete.insert(cur);
    }
    if (!any) throw EmptyInput("no attempts for problem " + problem_id);
    for (const auto& key : final_incomplete) {
        VertexInfo& v = net.vertices[key];
        auto it = net.edges.lower_bound({key, std::string{}});
        bool has_out = it != net.edges.end() && it->first.first == key;
        v.is_dead_end = !v.is_goal && !has_out;
    }
    return net;
}

std::map<std::string, InteractionNetwork> build_networks(const std::vector<AttemptLog>& attempts) {
    std::set<std::string> ids;
    for (const auto& a : attempts) ids.insert(a.problem_id);
    std::map<std::string, InteractionNetwork> out;
    for (const auto& id : ids) out.emplace(id, build_network(attempts, id));
    return out;
}

std::string serialize_network(const InteractionNetwork& net) {
    json vs = json::array();
    for (const auto& [key, v] : net.vertices) {
        vs.push_back({{"key", key},
                      {"visits", v.visit_count},
                      {"start", v.is_start},
                      {"goal", v.is_goal},
                      {"solution_length", v.solution_length},
                      {"dead_end", v.is_dead_end}});
    }
    json es = json::array();
    for (const auto& [k, e] : net.edges)
        es.push_back({{"from", k.first}, {"action", k.second}, {"to", e.to_key}, {"count", e.traversal_count}});
    json j = {{"format", "inet"}, {"version", 1}, {"problem", net.problem_id},
              {"start", net.start_key}, {"vertices", vs}, {"edges", es}};
    return j.dump(1) + "\n";
}

InteractionNetwork deserialize_network(const std::string& bytes) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw FormatError(0, e.byte, e.what());
    }
    if (!j.is_object() || j.value("format", "") != "inet") throw FormatError(0, 0, "missing 'inet' format header");
    int version = j.value("version", 0);
    if (version != 1) throw FormatError(version, 0, "unsupported version");
    InteractionNetwork net;
    try {
        net.problem_id = j.at("problem").get<std::string>();
        net.start_key = j.at("start").get<std::string>();
        for (const auto& v : j.at("vertices")) {
            VertexInfo info;
            info.visit_count = v.at("visits").get<long>();
            info.is_start = v.at("start").get<bool>();
            info.is_goal = v.at("goal").get<bool>();
            info.solution_length = v.at("solution_length").get<int>();
            info.is_dead_end = v.at("dead_end").get<bool>();
            net.vertices.emplace(v.at("key").get<std::string>(), info);
        }
        for (const auto& e : j.at("edges")) {
            net.edges[{e.at("from").get<std::string>(), e.at("action").get<std::string>()}] =
                EdgeInfo{e.at("to").get<std::string>(), e.at("count").get<long>()};
        }
    } catch (const json::exception& e) {
        throw FormatError(version, 0, e.what());
    }
    for (const auto& [k, e] : net.edges) {
        if (!net.vertices.count(k.first) || !net.vertices.count(e.to_key))
            throw FormatError(version, 0, "edge references unknown vertex");
    }
    return net;
}

void save_network(const InteractionNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << serialize_network(net);
}

InteractionNetwork load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open network file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize_network(ss.str());
}

}  // namespace helpneed

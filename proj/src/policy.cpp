#include "helpneed/policy.hpp"

#include <nlohmann/json.hpp>

#include "helpneed/errors.hpp"

namespace helpneed {

using nlohmann::json;

HintContent choose_hint(const std::string& state_key, const InteractionNetwork& net, const QualityTable& q) {
    const VertexInfo* v = net.find(state_key);
    if (!v) throw NoSuccessor("state not in network: " + state_key);
    if (v->absorbing()) throw NoSuccessor("absorbing state has no hint: " + state_key);
    const std::pair<std::string, EdgeInfo>* best = nullptr;
    double best_q = 0.0;
    std::string best_text;
    for (const auto& e : net.out_edges(state_key)) {
        if (!signature_is_derive(e.first) || !q.contains(e.second.to_key)) continue;
        double g = q.at(e.second.to_key).gqv;
        std::string text = signature_derived(e.first);
        bool better = !best || g > best_q ||
                      (g == best_q && (e.second.traversal_count > best->second.traversal_count ||
                                       (e.second.traversal_count == best->second.traversal_count && text < best_text)));
        if (better) {
            best = &e;
            best_q = g;
            best_text = text;
        }
    }
    if (!best) throw NoSuccessor("no outgoing derivation from " + state_key);
    return {best_text, false};
}

const char* to_string(PolicyMode m) {
    switch (m) {
        case PolicyMode::Adaptive: return "Adaptive";
        case PolicyMode::Control: return "Control";
        case PolicyMode::Random: return "Random";
    }
    return "?";
}

json to_json(const PolicyConfig& c) {
    return {{"mode", to_string(c.mode)},
            {"random_p", c.random_p},
            {"max_consecutive_proactive", c.max_consecutive_proactive ? json(*c.max_consecutive_proactive) : json(-1)}};
}

PolicyConfig policy_config_from_json(const json& j) {
    PolicyConfig c;
    for (const auto& [k, v] : j.items()) {
        if (k == "mode") {
            std::string m = v.get<std::string>();
            if (m == "Adaptive") c.mode = PolicyMode::Adaptive;
            else if (m == "Control") c.mode = PolicyMode::Control;
            else if (m == "Random") c.mode = PolicyMode::Random;
            else throw ConfigError("unknown policy mode: " + m);
        } else if (k == "random_p") {
            c.random_p = v.get<double>();
        } else if (k == "max_consecutive_proactive") {
            int n = v.get<int>();
            c.max_consecutive_proactive = n < 0 ? std::nullopt : std::optional<int>(n);
        } else {
            throw ConfigError("unknown policy key: " + k);
        }
    }
    if (c.random_p < 0.0 || c.random_p > 1.0) throw ConfigError("random_p must lie in [0,1]");
    return c;
}

Decision policy_decide(const PolicyConfig& cfg, bool predicted_helpneed, int consecutive_proactive,
                       double uniform_draw) {
    bool capped = cfg.max_consecutive_proactive && consecutive_proactive >= *cfg.max_consecutive_proactive;
    switch (cfg.mode) {
        case PolicyMode::Control: return Decision::Withhold;
        case PolicyMode::Adaptive:
            return predicted_helpneed && !capped ? Decision::GiveProactive : Decision::Withhold;
        case PolicyMode::Random:
            return uniform_draw < cfg.random_p && !capped ? Decision::GiveProactive : Decision::Withhold;
    }
    return Decision::Withhold;
}

}  // namespace helpneed

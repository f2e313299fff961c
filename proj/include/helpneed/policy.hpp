#pragma once

#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "helpneed/network.hpp"
#include "helpneed/quality.hpp"

namespace helpneed {

struct HintContent {
    std::string target;  // canonical statement to derive
    bool justified = false;
};

// Target of the derive edge whose successor has maximal GQV; ties go to the
// higher traversal count, then to the lexicographically smaller statement.
HintContent choose_hint(const std::string& state_key, const InteractionNetwork& net, const QualityTable& q);

enum class PolicyMode { Adaptive, Control, Random };
enum class Decision { Withhold, GiveProactive };

struct PolicyConfig {
    PolicyMode mode = PolicyMode::Control;
    double random_p = 0.0;
    std::optional<int> max_consecutive_proactive = 3;  // nullopt disables the cap
};

const char* to_string(PolicyMode m);
nlohmann::json to_json(const PolicyConfig& c);
PolicyConfig policy_config_from_json(const nlohmann::json& j);

// `uniform_draw` in [0,1) is consumed only by Random mode.
Decision policy_decide(const PolicyConfig& cfg, bool predicted_helpneed, int consecutive_proactive,
                       double uniform_draw = 0.0);

}  // namespace helpneed

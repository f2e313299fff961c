#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "helpneed/logic.hpp"
#include "helpneed/problem.hpp"

namespace helpneed {

// Exact shortest-completion oracle for one problem. Statements are drawn
// from a finite closure: everything derivable by MP, MT, HS, DS and SIMP,
// plus CONJ/ADD results that occur as subformulas of closure members or of
// the conclusion. Derivation only grows a state, so distances are computed
// by memoized recursion over the subset lattice.
class ShortestCompletion {
public:
    static constexpr std::size_t kMaxUniverse = 40;

    explicit ShortestCompletion(const Problem& problem);

    const std::vector<std::string>& universe() const { return universe_; }

    // Number of derivations still needed from `state`; throws UnsolvableProblem
    // if the conclusion cannot be reached.
    int distance(const ProofState& state) const;
    int shortest_length() const { return start_distance_; }

    // Derivations from legal_derivations(state) that lie on some shortest completion.
    std::vector<Derivation> optimal_moves(const ProofState& state) const;

private:
    using Mask = std::uint64_t;
    static constexpr int kInf = 1 << 20;

    Problem problem_;
    std::vector<std::string> universe_;
    std::vector<Expr> universe_exprs_;
    std::vector<std::vector<Mask>> requirements_;  // per statement: premise masks that derive it
    Mask given_mask_ = 0;
    std::size_t goal_bit_ = 0;
    int start_distance_ = 0;
    mutable std::unordered_map<Mask, int> memo_;

    Mask mask_of(const ProofState& state) const;
    int dist(Mask m) const;
};

}  // namespace helpneed

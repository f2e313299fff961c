#include "helpneed/search.hpp"

#include <algorithm>

#include "helpneed/errors.hpp"

namespace helpneed {

namespace {

constexpr Rule kClosureRules[] = {Rule::MP, Rule::MT, Rule::HS, Rule::DS, Rule::SIMP};

}  // namespace

ShortestCompletion::ShortestCompletion(const Problem& problem) : problem_(problem) {
    ProofState start = problem.start();
    std::vector<Expr> u(start.exprs().begin(), start.exprs().end());
    Expr goal = parse(problem.conclusion);
    std::vector<char> atoms = problem.atoms();

    auto known = [&](const Expr& e) { return std::find(u.begin(), u.end(), e) != u.end(); };
    auto is_target = [&](const Expr& e) {
        if (contains_subformula(goal, e)) return true;
        return std::any_of(u.begin(), u.end(), [&](const Expr& w) { return contains_subformula(w, e); });
    };

    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<Expr> fresh;
        auto offer = [&](const std::vector<Expr>& results, bool filtered) {
            for (const auto& e : results) {
                if (known(e) || std::find(fresh.begin(), fresh.end(), e) != fresh.end()) continue;
                if (filtered && !is_target(e)) continue;
                fresh.push_back(e);
            }
        };
        for (std::size_t i = 0; i < u.size(); ++i) {
            offer(apply_rule_ordered(Rule::SIMP, {u[i]}), false);
            offer(apply_rule_ordered(Rule::ADD, {u[i]}, atoms), true);
            for (std::size_t j = 0; j < u.size(); ++j) {
                if (i == j) continue;
                for (Rule r : kClosureRules)
                    if (rule_arity(r) == 2) offer(apply_rule_ordered(r, {u[i], u[j]}), false);
                offer(apply_rule_ordered(Rule::CONJ, {u[i], u[j]}), true);
            }
        }
        if (!fresh.empty()) {
            grew = true;
            u.insert(u.end(), fresh.begin(), fresh.end());
        }
        if (u.size() > 4 * kMaxUniverse)
            throw UnsolvableProblem("statement closure too large for problem " + problem.id);
    }
    if (!known(goal)) throw UnsolvableProblem("conclusion unreachable for problem " + problem.id);

    // Premise requirements over the full closure, then keep only statements
    // that can contribute to deriving the conclusion.
    const std::size_t n = u.size();
    std::vector<std::vector<std::vector<std::size_t>>> reqs(n);
    auto index_of = [&](const Expr& e) -> std::ptrdiff_t {
        auto it = std::find(u.begin(), u.end(), e);
        return it == u.end() ? -1 : it - u.begin();
    };
    for (Rule r : kAllRules) {
        for (std::size_t i = 0; i < n; ++i) {
            if (rule_arity(r) == 1) {
                for (const auto& e : apply_rule_ordered(r, {u[i]}, atoms))
                    if (auto k = index_of(e); k >= 0) reqs[static_cast<std::size_t>(k)].push_back({i});
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                for (const auto& e : apply_rule_ordered(r, {u[i], u[j]}, atoms))
                    if (auto k = index_of(e); k >= 0) reqs[static_cast<std::size_t>(k)].push_back({i, j});
            }
        }
    }
    const std::size_t n_givens = start.given_count();
    std::vector<bool> relevant(n, false);
    std::vector<std::size_t> stack{static_cast<std::size_t>(index_of(goal))};
    relevant[stack.back()] = true;
    while (!stack.empty()) {
        std::size_t k = stack.back();
        stack.pop_back();
        if (k < n_givens) continue;
        for (const auto& req : reqs[k])
            for (std::size_t p : req)
                if (!relevant[p]) {
                    relevant[p] = true;
                    stack.push_back(p);
                }
    }
    std::vector<std::ptrdiff_t> remap(n, -1);
    for (std::size_t k = 0; k < n; ++k) {
        if (k >= n_givens && !relevant[k]) continue;
        remap[k] = static_cast<std::ptrdiff_t>(universe_exprs_.size());
        universe_exprs_.push_back(u[k]);
        universe_.push_back(canonical(u[k]));
    }
    if (universe_.size() > kMaxUniverse)
        throw UnsolvableProblem("relevant statement universe too large for problem " + problem.id);
    requirements_.assign(universe_.size(), {});
    for (std::size_t k = 0; k < n; ++k) {
        if (remap[k] < 0 || k < n_givens) continue;
        auto& dst = requirements_[static_cast<std::size_t>(remap[k])];
        for (const auto& req : reqs[k]) {
            Mask m = 0;
            bool ok = true;
            for (std::size_t p : req) {
                if (remap[p] < 0) {
                    ok = false;
                    break;
                }
                m |= Mask{1} << remap[p];
            }
            if (ok && std::find(dst.begin(), dst.end(), m) == dst.end()) dst.push_back(m);
        }
    }
    for (std::size_t k = 0; k < n_givens; ++k) given_mask_ |= Mask{1} << k;
    goal_bit_ = static_cast<std::size_t>(remap[static_cast<std::size_t>(index_of(goal))]);
    start_distance_ = dist(given_mask_);
    if (start_distance_ >= kInf) throw UnsolvableProblem("conclusion unreachable for problem " + problem.id);
}

ShortestCompletion::Mask ShortestCompletion::mask_of(const ProofState& state) const {
    Mask m = given_mask_;
    for (std::size_t k = 0; k < universe_.size(); ++k)
        if (state.contains(universe_[k])) m |= Mask{1} << k;
    return m;
}

int ShortestCompletion::dist(Mask m) const {
    if (m >> goal_bit_ & 1u) return 0;
    if (auto it = memo_.find(m); it != memo_.end()) return it->second;
    int best = kInf;
    for (std::size_t k = 0; k < universe_.size(); ++k) {
        Mask bit = Mask{1} << k;
        if (m & bit) continue;
        bool derivable = std::any_of(requirements_[k].begin(), requirements_[k].end(),
                                     [&](Mask req) { return (req & m) == req; });
        if (!derivable) continue;
        best = std::min(best, 1 + dist(m | bit));
        if (best == 1) break;
    }
    memo_.emplace(m, best);
    return best;
}

int ShortestCompletion::distance(const ProofState& state) const {
    int d = dist(mask_of(state));
    if (d >= kInf) throw UnsolvableProblem("no completion from state of problem " + problem_.id);
    return d;
}

std::vector<Derivation> ShortestCompletion::optimal_moves(const ProofState& state) const {
    Mask m = mask_of(state);
    int d = dist(m);
    std::vector<Derivation> out;
    if (d == 0 || d >= kInf) return out;
    for (auto& der : legal_derivations(state, {kAllRules.begin(), kAllRules.end()}, problem_.atoms())) {
        auto it = std::find(universe_.begin(), universe_.end(), der.derived);
        if (it == universe_.end()) continue;
        Mask next = m | (Mask{1} << (it - universe_.begin()));
        if (dist(next) == d - 1) out.push_back(std::move(der));
    }
    return out;
}

}  // namespace helpneed

#include <doctest.h>

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <unordered_set>

#include "helpneed/errors.hpp"
#include "helpneed/fixtures.hpp"
#include "helpneed/logic.hpp"
#include "helpneed/search.hpp"

using namespace helpneed;

namespace {

Expr A(char c) { return Expr::atom(c); }
Expr N(Expr e) { return Expr::negate(std::move(e)); }
Expr And(Expr l, Expr r) { return Expr::binary(BinOp::And, std::move(l), std::move(r)); }
Expr Or(Expr l, Expr r) { return Expr::binary(BinOp::Or, std::move(l), std::move(r)); }
Expr Imp(Expr l, Expr r) { return Expr::binary(BinOp::Implies, std::move(l), std::move(r)); }
Expr Iff(Expr l, Expr r) { return Expr::binary(BinOp::Iff, std::move(l), std::move(r)); }

Expr random_expr(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, 5);
    int k = depth <= 0 ? 0 : pick(rng);
    if (k == 0) return A(static_cast<char>('A' + std::uniform_int_distribution<int>(0, 4)(rng)));
    if (k == 1) return N(random_expr(rng, depth - 1));
    BinOp ops[] = {BinOp::And, BinOp::Or, BinOp::Implies, BinOp::Iff};
    return Expr::binary(ops[k - 2], random_expr(rng, depth - 1), random_expr(rng, depth - 1));
}

bool entails(const std::vector<Expr>& premises, const Expr& c) {
    for (std::uint32_t v = 0; v < 32; ++v) {
        bool all = std::all_of(premises.begin(), premises.end(), [&](const Expr& p) { return evaluate(p, v); });
        if (all && !evaluate(c, v)) return false;
    }
    return true;
}

// Every rule over every ordered premise tuple, first occurrence per text.
std::set<std::string> brute_derivations(const ProofState& s, const std::vector<char>& atoms) {
    std::set<std::string> out;
    const auto& ex = s.exprs();
    for (Rule r : kAllRules) {
        for (std::size_t i = 0; i < ex.size(); ++i) {
            if (rule_arity(r) == 1) {
                for (const auto& c : apply_rule_ordered(r, {ex[i]}, atoms))
                    if (!s.contains(canonical(c))) out.insert(canonical(c));
                continue;
            }
            for (std::size_t j = 0; j < ex.size(); ++j) {
                if (i == j) continue;
                for (const auto& c : apply_rule_ordered(r, {ex[i], ex[j]}, atoms))
                    if (!s.contains(canonical(c))) out.insert(canonical(c));
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("parse: grammar shapes") {
    CHECK(parse("A->C") == Imp(A('A'), A('C')));
    CHECK(parse("~(A&B)") == N(And(A('A'), A('B'))));
    CHECK(parse("A->B->C") == Imp(A('A'), Imp(A('B'), A('C'))));
}

TEST_CASE("parse: twenty fixed strings against hand-built trees") {
    const Expr a = A('A'), b = A('B'), c = A('C'), d = A('D');
    const std::vector<std::pair<std::string, Expr>> cases = {
        {"A->B->C", Imp(a, Imp(b, c))},
        {"(A->B)->C", Imp(Imp(a, b), c)},
        {"A->B->C->D", Imp(a, Imp(b, Imp(c, d)))},
        {"A&B&C", And(And(a, b), c)},
        {"A|B|C", Or(Or(a, b), c)},
        {"A<->B<->C", Iff(Iff(a, b), c)},
        {"A&B|C", Or(And(a, b), c)},
        {"A|B&C", Or(a, And(b, c))},
        {"A|B->C", Imp(Or(a, b), c)},
        {"A->B|C", Imp(a, Or(b, c))},
        {"A->B<->C", Iff(Imp(a, b), c)},
        {"A<->B->C", Iff(a, Imp(b, c))},
        {"~A&B", And(N(a), b)},
        {"~~A", N(N(a))},
        {"~(A->B)", N(Imp(a, b))},
        {"A&(B|C)", And(a, Or(b, c))},
        {"(A<->B)&C", And(Iff(a, b), c)},
        {"A->(B<->C)", Imp(a, Iff(b, c))},
        {" A -> ~B & C ", Imp(a, And(N(b), c))},
        {"((A))", a},
    };
    for (const auto& [text, tree] : cases) {
        CAPTURE(text);
        CHECK(parse(text) == tree);
    }
}

TEST_CASE("parse: malformed input raises SyntaxError with position") {
    for (const char* bad : {"", "A&", "(A", "A B", "a", "A->", "A-B", "A)", "&A", "A<-B"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse(bad), SyntaxError);
    }
    try {
        parse("A&");
        FAIL("expected throw");
    } catch (const SyntaxError& e) {
        CHECK(e.position() == 2);
    }
}

TEST_CASE("canonical: minimal parentheses, no simplification") {
    CHECK(canonical(Imp(A('A'), A('C'))) == "A->C");
    CHECK(canonical(N(N(A('A')))) == "~~A");
    CHECK(canonical(Imp(Imp(A('A'), A('B')), A('C'))) == "(A->B)->C");
    CHECK(canonical(Imp(A('A'), Imp(A('B'), A('C')))) == "A->B->C");
    CHECK(canonical(And(A('A'), And(A('B'), A('C')))) == "A&(B&C)");
    CHECK(canonical(N(And(A('A'), A('B')))) == "~(A&B)");
    CHECK(normalize(" ( A & B ) -> C ") == "A&B->C");
}

TEST_CASE("canonical: 1000 random round trips") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        Expr e = random_expr(rng, 5);
        std::string t = canonical(e);
        CAPTURE(t);
        CHECK(parse(t) == e);
        CHECK(canonical(parse(t)) == t);
    }
}

TEST_CASE("apply_rule: schema examples") {
    auto texts = [](const std::vector<Expr>& v) {
        std::vector<std::string> out;
        for (const auto& e : v) out.push_back(canonical(e));
        return out;
    };
    CHECK(texts(apply_rule(Rule::MP, {parse("A"), parse("A->C")})) == std::vector<std::string>{"C"});
    CHECK(texts(apply_rule(Rule::HS, {parse("A->C"), parse("C->E")})) == std::vector<std::string>{"A->E"});
    CHECK(apply_rule(Rule::MP, {parse("A"), parse("B->C")}).empty());
    CHECK(texts(apply_rule(Rule::MT, {parse("A->B"), parse("~B")})) == std::vector<std::string>{"~A"});
    CHECK(texts(apply_rule(Rule::DS, {parse("A|B"), parse("~A")})) == std::vector<std::string>{"B"});
    auto simp = texts(apply_rule(Rule::SIMP, {parse("A&B")}));
    CHECK(std::set<std::string>(simp.begin(), simp.end()) == std::set<std::string>{"A", "B"});
    auto add = texts(apply_rule(Rule::ADD, {parse("A")}, {'A', 'B'}));
    CHECK(std::find(add.begin(), add.end(), "A|B") != add.end());
    CHECK(apply_rule(Rule::SIMP, {parse("A|B")}).empty());
}

TEST_CASE("apply_rule: truth-table soundness") {
    std::mt19937_64 rng(11);
    std::vector<Expr> pool;
    for (const char* s : {"A", "B", "~A", "~B", "A->B", "B->C", "A|B", "A&B", "~C", "C", "A->C", "(A->B)->C",
                          "~A|B", "A&B->C", "D->E", "E", "~(A&B)", "A<->B"})
        pool.push_back(parse(s));
    for (int i = 0; i < 40; ++i) pool.push_back(random_expr(rng, 2));
    const std::vector<char> atoms{'A', 'B', 'C', 'D', 'E'};
    long checked = 0;
    for (Rule r : kAllRules)
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (rule_arity(r) == 1) {
                for (const auto& c : apply_rule_ordered(r, {pool[i]}, atoms)) {
                    CHECK(entails({pool[i]}, c));
                    ++checked;
                }
                continue;
            }
            for (std::size_t j = 0; j < pool.size(); ++j)
                for (const auto& c : apply_rule_ordered(r, {pool[i], pool[j]}, atoms)) {
                    CHECK(entails({pool[i], pool[j]}, c));
                    ++checked;
                }
        }
    CHECK(checked > 200);
}

TEST_CASE("legal_derivations: examples") {
    ProofState s("p", {"A", "A->C"}, "C");
    auto ds = legal_derivations(s);
    bool found = std::any_of(ds.begin(), ds.end(), [](const Derivation& d) {
        return d.rule == Rule::MP && d.premises == std::vector<std::size_t>{0, 1} && d.derived == "C";
    });
    CHECK(found);
    ProofState g = s.with_derived(parse("C"));
    for (const auto& d : legal_derivations(g)) CHECK_FALSE(g.contains(d.derived));
}

TEST_CASE("legal_derivations: matches brute force on fixture states") {
    auto p = fixtures::fig3_problem();
    const auto atoms = p.atoms();
    std::vector<ProofState> states{p.start()};
    auto tt = fixtures::three_trajectory();
    for (const auto& a : tt.attempts)
        for (const auto& r : a.records)
            states.push_back(ProofState::from_statements(p.id, r.post_state, p.givens.size(), p.conclusion));
    std::set<std::string> seen;
    for (const auto& s : states) {
        if (!seen.insert(state_key(s)).second) continue;
        auto ds = legal_derivations(s, {kAllRules.begin(), kAllRules.end()}, atoms);
        std::set<std::string> got;
        for (const auto& d : ds) {
            CHECK(got.insert(d.derived).second);  // deduplicated
            std::vector<Expr> prem;
            for (auto i : d.premises) prem.push_back(s.exprs()[i]);
            auto cs = apply_rule_ordered(d.rule, prem, atoms);
            CHECK(std::any_of(cs.begin(), cs.end(), [&](const Expr& c) { return canonical(c) == d.derived; }));
        }
        CHECK(got == brute_derivations(s, atoms));
    }
    CHECK(seen.size() > 10);
}

TEST_CASE("state_key: set semantics") {
    ProofState a("p", {"A", "A->C"}, "C");
    auto x = a.with_derived(parse("C")).with_derived(parse("A|C"));
    auto y = a.with_derived(parse("A|C")).with_derived(parse("C"));
    CHECK(state_key(x) == state_key(y));
    CHECK(state_key(a) == "p|A;A->C");
}

TEST_CASE("state_key: 10000 random states without collisions") {
    std::mt19937_64 rng(3);
    std::vector<std::string> pool;
    for (int i = 0; pool.size() < 40; ++i) {
        std::string t = canonical(random_expr(rng, 2));
        if (std::find(pool.begin(), pool.end(), t) == pool.end()) pool.push_back(t);
    }
    std::map<std::string, std::set<std::string>> by_key;
    for (int i = 0; i < 10000; ++i) {
        std::set<std::string> members;
        std::uint64_t bits = rng();
        for (std::size_t j = 0; j < pool.size(); ++j)
            if (bits >> j & 1) members.insert(pool[j]);
        auto key = state_key("p", {members.begin(), members.end()});
        auto [it, fresh] = by_key.emplace(key, members);
        if (!fresh) CHECK(it->second == members);
    }
    CHECK(by_key.size() > 9000);
}

TEST_CASE("is_goal and the four-step fixture solution") {
    ProofState s("p", {"A->C", "C->E"}, "A->E");
    CHECK_FALSE(is_goal(s));
    CHECK(is_goal(s.with_derived(parse("A->E"))));

    auto p = fixtures::fig3_problem();
    ProofState cur = p.start();
    CHECK_FALSE(is_goal(cur));
    for (const char* t : {"A->E", "A", "E", "F"}) cur = cur.with_derived(parse(t));
    CHECK(is_goal(cur));
}

TEST_CASE("fixture P-fig3: no completion shorter than four steps") {
    auto p = fixtures::fig3_problem();
    const auto atoms = p.atoms();
    // Exhaustive BFS over statement sets to depth 3.
    std::unordered_set<std::string> seen{state_key(p.start())};
    std::vector<ProofState> frontier{p.start()};
    for (int depth = 1; depth <= 3; ++depth) {
        std::vector<ProofState> next;
        for (const auto& s : frontier)
            for (const auto& d : legal_derivations(s, {kAllRules.begin(), kAllRules.end()}, atoms)) {
                ProofState t = s.with_derived(parse(d.derived));
                CHECK_FALSE(is_goal(t));
                if (seen.insert(state_key(t)).second) next.push_back(std::move(t));
            }
        frontier = std::move(next);
    }
    ShortestCompletion sc(p);
    CHECK(sc.shortest_length() == 4);
    CHECK(sc.distance(p.start()) == 4);
}

TEST_CASE("proof state: deletion only removes derived statements") {
    ProofState s("p", {"A", "A->C"}, "C");
    auto t = s.with_derived(parse("C"));
    CHECK(t.without(2).statements() == s.statements());
    CHECK_THROWS(t.without(0));
}

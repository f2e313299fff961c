#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace helpneed {

enum class BinOp { And, Or, Implies, Iff };

class Expr {
public:
    enum class Kind { Atom, Not, Binary };

    static Expr atom(char name);
    static Expr negate(Expr child);
    static Expr binary(BinOp op, Expr left, Expr right);

    Kind kind() const;
    char name() const;
    BinOp op() const;
    const Expr& child() const;
    const Expr& left() const;
    const Expr& right() const;

    bool is_binary(BinOp op) const { return kind() == Kind::Binary && this->op() == op; }

    friend bool operator==(const Expr& a, const Expr& b);
    friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

struct Expr::Node {
    Kind kind = Kind::Atom;
    char name = 0;
    BinOp op = BinOp::And;
    std::vector<Expr> children;
};

inline Expr::Kind Expr::kind() const { return node_->kind; }
inline char Expr::name() const { return node_->name; }
inline BinOp Expr::op() const { return node_->op; }
inline const Expr& Expr::child() const { return node_->children[0]; }
inline const Expr& Expr::left() const { return node_->children[0]; }
inline const Expr& Expr::right() const { return node_->children[1]; }

Expr parse(std::string_view text);
std::string canonical(const Expr& e);

// Canonical text of a parsed statement; throws SyntaxError.
std::string normalize(std::string_view text);

// Truth value under an assignment indexed by letter (bit i = atom 'A'+i).
bool evaluate(const Expr& e, std::uint32_t assignment);
// Bitmask of atoms occurring in e.
std::uint32_t atom_mask(const Expr& e);
bool contains_subformula(const Expr& whole, const Expr& part);

enum class Rule { ADD, CONJ, DS, HS, MP, MT, SIMP };

// Rules in name order, the order legal_derivations reports them.
inline constexpr std::array<Rule, 7> kAllRules{Rule::ADD, Rule::CONJ, Rule::DS, Rule::HS,
                                               Rule::MP,  Rule::MT,   Rule::SIMP};

const char* rule_name(Rule r);
std::optional<Rule> rule_from_name(std::string_view name);
int rule_arity(Rule r);

// Conclusions obtainable with premises taken exactly in the given order.
std::vector<Expr> apply_rule_ordered(Rule r, const std::vector<Expr>& premises,
                                     const std::vector<char>& atoms = {});
// Conclusions for the given order and, for arity 2, the swapped order.
// ADD disjoins each atom in `atoms`; when empty it uses the premise's own atoms.
std::vector<Expr> apply_rule(Rule r, const std::vector<Expr>& premises, const std::vector<char>& atoms = {});

class ProofState {
public:
    ProofState() = default;
    ProofState(std::string problem_id, const std::vector<std::string>& givens, const std::string& conclusion);

    const std::string& problem_id() const { return problem_id_; }
    const std::vector<std::string>& statements() const { return texts_; }
    const std::vector<Expr>& exprs() const { return exprs_; }
    std::size_t given_count() const { return n_givens_; }
    const std::string& conclusion() const { return conclusion_; }
    std::size_t size() const { return texts_.size(); }

    bool contains(const std::string& canonical_text) const;
    std::optional<std::size_t> index_of(const std::string& canonical_text) const;
    bool is_given(std::size_t index) const { return index < n_givens_; }

    ProofState with_derived(const Expr& e) const;
    ProofState without(std::size_t index) const;

    // Rebuilds a state from an explicit statement list (givens must lead).
    static ProofState from_statements(std::string problem_id, const std::vector<std::string>& statements,
                                      std::size_t n_givens, const std::string& conclusion);

private:
    std::string problem_id_;
    std::vector<std::string> texts_;
    std::vector<Expr> exprs_;
    std::size_t n_givens_ = 0;
    std::string conclusion_;
};

struct Derivation {
    Rule rule;
    std::vector<std::size_t> premises;
    std::string derived;

    friend bool operator==(const Derivation&, const Derivation&) = default;
};

// Atoms appearing anywhere in the givens and conclusion, ascending.
std::vector<char> problem_atoms(const std::vector<std::string>& givens, const std::string& conclusion);

std::vector<Derivation> legal_derivations(const ProofState& state,
                                          const std::vector<Rule>& rules = {kAllRules.begin(), kAllRules.end()},
                                          const std::vector<char>& atoms = {});

std::string state_key(const std::string& problem_id, std::vector<std::string> statements);
std::string state_key(const ProofState& state);
bool is_goal(const ProofState& state);

}  // namespace helpneed

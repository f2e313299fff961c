#include "helpneed/logic.hpp"

#include <algorithm>
#include <set>

#include "helpneed/errors.hpp"

namespace helpneed {

Expr Expr::atom(char name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Atom;
    n->name = name;
    return Expr(std::move(n));
}

Expr Expr::negate(Expr child) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Not;
    n->children.push_back(std::move(child));
    return Expr(std::move(n));
}

Expr Expr::binary(BinOp op, Expr left, Expr right) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Binary;
    n->op = op;
    n->children.push_back(std::move(left));
    n->children.push_back(std::move(right));
    return Expr(std::move(n));
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Expr::Kind::Atom: return a.name() == b.name();
        case Expr::Kind::Not: return a.child() == b.child();
        case Expr::Kind::Binary: return a.op() == b.op() && a.left() == b.left() && a.right() == b.right();
    }
    return false;
}

namespace {

// Binding strength; higher binds tighter.
int precedence(BinOp op) {
    switch (op) {
        case BinOp::Iff: return 1;
        case BinOp::Implies: return 2;
        case BinOp::Or: return 3;
        case BinOp::And: return 4;
    }
    return 0;
}

constexpr int kNotPrec = 5;
constexpr int kAtomPrec = 6;

int precedence(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Atom: return kAtomPrec;
        case Expr::Kind::Not: return kNotPrec;
        case Expr::Kind::Binary: return precedence(e.op());
    }
    return 0;
}

bool right_assoc(BinOp op) { return op == BinOp::Implies; }

const char* symbol(BinOp op) {
    switch (op) {
        case BinOp::And: return "&";
        case BinOp::Or: return "|";
        case BinOp::Implies: return "->";
        case BinOp::Iff: return "<->";
    }
    return "?";
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr run() {
        Expr e = parse_level(1);
        skip_ws();
        if (pos_ != text_.size()) fail("operator or end of input");
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& expected) { throw SyntaxError(pos_, expected, std::string(text_)); }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    std::optional<BinOp> peek_op() {
        skip_ws();
        auto rest = text_.substr(pos_);
        if (rest.starts_with("<->")) return BinOp::Iff;
        if (rest.starts_with("->")) return BinOp::Implies;
        if (rest.starts_with("&")) return BinOp::And;
        if (rest.starts_with("|")) return BinOp::Or;
        return std::nullopt;
    }

    void consume(BinOp op) { pos_ += std::string_view(symbol(op)).size(); }

    Expr parse_level(int level) {
        if (level > precedence(BinOp::And)) return parse_unary();
        Expr lhs = parse_level(level + 1);
        while (true) {
            auto op = peek_op();
            if (!op || precedence(*op) != level) return lhs;
            consume(*op);
            if (right_assoc(*op)) return Expr::binary(*op, lhs, parse_level(level));
            lhs = Expr::binary(*op, lhs, parse_level(level + 1));
        }
    }

    Expr parse_unary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("atom, '~' or '('");
        char c = text_[pos_];
        if (c == '~') {
            ++pos_;
            return Expr::negate(parse_unary());
        }
        if (c == '(') {
            ++pos_;
            Expr inner = parse_level(1);
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ')') fail("')'");
            ++pos_;
            return inner;
        }
        if (c >= 'A' && c <= 'Z') {
            ++pos_;
            return Expr::atom(c);
        }
        fail("atom, '~' or '('");
    }
};

void print(const Expr& e, std::string& out) {
    switch (e.kind()) {
        case Expr::Kind::Atom: out.push_back(e.name()); return;
        case Expr::Kind::Not: {
            out.push_back('~');
            bool wrap = precedence(e.child()) < kNotPrec;
            if (wrap) out.push_back('(');
            print(e.child(), out);
            if (wrap) out.push_back(')');
            return;
        }
        case Expr::Kind::Binary: {
            int p = precedence(e.op());
            bool ra = right_assoc(e.op());
            int lp = precedence(e.left());
            int rp = precedence(e.right());
            bool wrap_l = lp < p || (lp == p && ra);
            bool wrap_r = rp < p || (rp == p && !ra);
            if (wrap_l) out.push_back('(');
            print(e.left(), out);
            if (wrap_l) out.push_back(')');
            out += symbol(e.op());
            if (wrap_r) out.push_back('(');
            print(e.right(), out);
            if (wrap_r) out.push_back(')');
            return;
        }
    }
}

}  // namespace

Expr parse(std::string_view text) { return Parser(text).run(); }

std::string canonical(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

std::string normalize(std::string_view text) { return canonical(parse(text)); }

bool evaluate(const Expr& e, std::uint32_t assignment) {
    switch (e.kind()) {
        case Expr::Kind::Atom: return (assignment >> (e.name() - 'A')) & 1u;
        case Expr::Kind::Not: return !evaluate(e.child(), assignment);
        case Expr::Kind::Binary: {
            bool l = evaluate(e.left(), assignment);
            bool r = evaluate(e.right(), assignment);
            switch (e.op()) {
                case BinOp::And: return l && r;
                case BinOp::Or: return l || r;
                case BinOp::Implies: return !l || r;
                case BinOp::Iff: return l == r;
            }
        }
    }
    return false;
}

std::uint32_t atom_mask(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Atom: return 1u << (e.name() - 'A');
        case Expr::Kind::Not: return atom_mask(e.child());
        case Expr::Kind::Binary: return atom_mask(e.left()) | atom_mask(e.right());
    }
    return 0;
}

bool contains_subformula(const Expr& whole, const Expr& part) {
    if (whole == part) return true;
    switch (whole.kind()) {
        case Expr::Kind::Atom: return false;
        case Expr::Kind::Not: return contains_subformula(whole.child(), part);
        case Expr::Kind::Binary:
            return contains_subformula(whole.left(), part) || contains_subformula(whole.right(), part);
    }
    return false;
}

const char* rule_name(Rule r) {
    switch (r) {
        case Rule::ADD: return "ADD";
        case Rule::CONJ: return "CONJ";
        case Rule::DS: return "DS";
        case Rule::HS: return "HS";
        case Rule::MP: return "MP";
        case Rule::MT: return "MT";
        case Rule::SIMP: return "SIMP";
    }
    return "?";
}

std::optional<Rule> rule_from_name(std::string_view name) {
    for (Rule r : kAllRules)
        if (name == rule_name(r)) return r;
    return std::nullopt;
}

int rule_arity(Rule r) { return (r == Rule::ADD || r == Rule::SIMP) ? 1 : 2; }

namespace {

void push_unique(std::vector<Expr>& out, Expr e) {
    if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(std::move(e));
}

std::vector<char> atoms_of(const Expr& e) {
    std::vector<char> out;
    std::uint32_t m = atom_mask(e);
    for (int i = 0; i < 26; ++i)
        if (m >> i & 1u) out.push_back(static_cast<char>('A' + i));
    return out;
}

}  // namespace

std::vector<Expr> apply_rule_ordered(Rule r, const std::vector<Expr>& premises, const std::vector<char>& atoms) {
    std::vector<Expr> out;
    if (premises.size() != static_cast<std::size_t>(rule_arity(r))) return out;
    const Expr& p = premises[0];
    switch (r) {
        case Rule::SIMP:
            if (p.is_binary(BinOp::And)) {
                push_unique(out, p.left());
                push_unique(out, p.right());
            }
            break;
        case Rule::ADD:
            for (char a : atoms.empty() ? atoms_of(p) : atoms) push_unique(out, Expr::binary(BinOp::Or, p, Expr::atom(a)));
            break;
        case Rule::MP: {
            const Expr& q = premises[1];
            if (q.is_binary(BinOp::Implies) && q.left() == p) push_unique(out, q.right());
            break;
        }
        case Rule::MT: {
            const Expr& q = premises[1];
            if (p.is_binary(BinOp::Implies) && q.kind() == Expr::Kind::Not && q.child() == p.right())
                push_unique(out, Expr::negate(p.left()));
            break;
        }
        case Rule::HS: {
            const Expr& q = premises[1];
            if (p.is_binary(BinOp::Implies) && q.is_binary(BinOp::Implies) && p.right() == q.left())
                push_unique(out, Expr::binary(BinOp::Implies, p.left(), q.right()));
            break;
        }
        case Rule::DS: {
            const Expr& q = premises[1];
            if (p.is_binary(BinOp::Or) && q.kind() == Expr::Kind::Not) {
                if (q.child() == p.left()) push_unique(out, p.right());
                if (q.child() == p.right()) push_unique(out, p.left());
            }
            break;
        }
        case Rule::CONJ: push_unique(out, Expr::binary(BinOp::And, p, premises[1])); break;
    }
    return out;
}

std::vector<Expr> apply_rule(Rule r, const std::vector<Expr>& premises, const std::vector<char>& atoms) {
    std::vector<Expr> out = apply_rule_ordered(r, premises, atoms);
    if (rule_arity(r) == 2 && premises.size() == 2) {
        for (auto& e : apply_rule_ordered(r, {premises[1], premises[0]}, atoms)) push_unique(out, std::move(e));
    }
    return out;
}

ProofState::ProofState(std::string problem_id, const std::vector<std::string>& givens, const std::string& conclusion)
    : problem_id_(std::move(problem_id)), conclusion_(normalize(conclusion)) {
    for (const auto& g : givens) {
        Expr e = parse(g);
        std::string t = canonical(e);
        if (contains(t)) throw ValidationError("duplicate given statement: " + t);
        texts_.push_back(std::move(t));
        exprs_.push_back(std::move(e));
    }
    n_givens_ = texts_.size();
}

ProofState ProofState::from_statements(std::string problem_id, const std::vector<std::string>& statements,
                                       std::size_t n_givens, const std::string& conclusion) {
    if (n_givens > statements.size()) throw ValidationError("state has fewer statements than givens");
    ProofState s(std::move(problem_id), {statements.begin(), statements.begin() + n_givens}, conclusion);
    for (std::size_t i = n_givens; i < statements.size(); ++i) {
        Expr e = parse(statements[i]);
        std::string t = canonical(e);
        if (s.contains(t)) throw ValidationError("duplicate statement: " + t);
        s.texts_.push_back(std::move(t));
        s.exprs_.push_back(std::move(e));
    }
    return s;
}

bool ProofState::contains(const std::string& canonical_text) const { return index_of(canonical_text).has_value(); }

std::optional<std::size_t> ProofState::index_of(const std::string& canonical_text) const {
    auto it = std::find(texts_.begin(), texts_.end(), canonical_text);
    if (it == texts_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - texts_.begin());
}

ProofState ProofState::with_derived(const Expr& e) const {
    std::string t = canonical(e);
    if (contains(t)) throw ValidationError("statement already present: " + t);
    ProofState s = *this;
    s.texts_.push_back(std::move(t));
    s.exprs_.push_back(e);
    return s;
}

ProofState ProofState::without(std::size_t index) const {
    if (index < n_givens_ || index >= texts_.size()) throw ValidationError("only derived statements can be deleted");
    ProofState s = *this;
    s.texts_.erase(s.texts_.begin() + static_cast<std::ptrdiff_t>(index));
    s.exprs_.erase(s.exprs_.begin() + static_cast<std::ptrdiff_t>(index));
    return s;
}

std::vector<char> problem_atoms(const std::vector<std::string>& givens, const std::string& conclusion) {
    std::uint32_t m = atom_mask(parse(conclusion));
    for (const auto& g : givens) m |= atom_mask(parse(g));
    std::vector<char> out;
    for (int i = 0; i < 26; ++i)
        if (m >> i & 1u) out.push_back(static_cast<char>('A' + i));
    return out;
}

std::vector<Derivation> legal_derivations(const ProofState& state, const std::vector<Rule>& rules,
                                          const std::vector<char>& atoms) {
    std::vector<Rule> ordered = rules;
    std::sort(ordered.begin(), ordered.end(),
              [](Rule a, Rule b) { return std::string_view(rule_name(a)) < std::string_view(rule_name(b)); });
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

    std::vector<char> add_atoms = atoms;
    if (add_atoms.empty()) {
        std::uint32_t m = atom_mask(parse(state.conclusion()));
        for (std::size_t i = 0; i < state.given_count(); ++i) m |= atom_mask(state.exprs()[i]);
        for (int i = 0; i < 26; ++i)
            if (m >> i & 1u) add_atoms.push_back(static_cast<char>('A' + i));
    }

    std::vector<Derivation> out;
    std::set<std::string> seen;
    auto emit = [&](Rule r, std::vector<std::size_t> idx, const std::vector<Expr>& results) {
        for (const auto& e : results) {
            std::string t = canonical(e);
            if (state.contains(t) || !seen.insert(t).second) continue;
            out.push_back({r, idx, std::move(t)});
        }
    };
    const auto& ex = state.exprs();
    for (Rule r : ordered) {
        if (rule_arity(r) == 1) {
            for (std::size_t i = 0; i < ex.size(); ++i) emit(r, {i}, apply_rule_ordered(r, {ex[i]}, add_atoms));
        } else {
            for (std::size_t i = 0; i < ex.size(); ++i)
                for (std::size_t j = 0; j < ex.size(); ++j)
                    if (i != j) emit(r, {i, j}, apply_rule_ordered(r, {ex[i], ex[j]}, add_atoms));
        }
    }
    return out;
}

std::string state_key(const std::string& problem_id, std::vector<std::string> statements) {
    std::sort(statements.begin(), statements.end());
    statements.erase(std::unique(statements.begin(), statements.end()), statements.end());
    std::string key = problem_id + "|";
    for (std::size_t i = 0; i < statements.size(); ++i) {
        if (i) key += ';';
        key += statements[i];
    }
    return key;
}

std::string state_key(const ProofState& state) { return state_key(state.problem_id(), state.statements()); }

bool is_goal(const ProofState& state) { return state.contains(state.conclusion()); }

}  // namespace helpneed

#ifndef GPI_FOL_HPP
#define GPI_FOL_HPP

#include "gpi/symbol.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gpi {

enum class TermKind { VARIABLE, CONSTANT };

struct Term {
    TermKind kind = TermKind::VARIABLE;
    Symbol name;

    static Term variable(Symbol n) { return {TermKind::VARIABLE, n}; }
    static Term constant(Symbol n) { return {TermKind::CONSTANT, n}; }

    bool is_variable() const { return kind == TermKind::VARIABLE; }
    bool is_constant() const { return kind == TermKind::CONSTANT; }

    bool operator==(const Term &o) const { return kind == o.kind && name == o.name; }
    bool operator!=(const Term &o) const { return !(*this == o); }
    bool operator<(const Term &o) const;
};

struct ActionTerm {
    Symbol symbol;
    std::vector<Term> args;

    bool operator==(const ActionTerm &o) const;
    bool operator!=(const ActionTerm &o) const { return !(*this == o); }
};

/*
  Immutable first-order state/regression formula. Fluent atoms implicitly
  refer to the current situation; ACTION_EQ nodes compare the single free
  action variable (lhs empty) or a substituted action term (lhs set) against
  a deterministic action term.
*/
class Formula {
public:
    enum class Kind {
        TRUE_CONST,
        FALSE_CONST,
        STATIC_ATOM,
        FLUENT_ATOM,
        EQ,
        ACTION_EQ,
        NOT,
        AND,
        OR,
        EXISTS,
        FORALL,
    };

    struct Node {
        Kind kind;
        Symbol pred;                        // STATIC_ATOM / FLUENT_ATOM
        std::vector<Term> args;             // atom args; EQ uses args[0], args[1]
        std::optional<ActionTerm> eq_lhs;   // ACTION_EQ; empty = free action variable
        ActionTerm eq_rhs;                  // ACTION_EQ
        Symbol var;                         // EXISTS / FORALL
        std::vector<Formula> kids;          // NOT(1), AND/OR(n), EXISTS/FORALL(1)
        std::size_t hash = 0;
    };

    Formula() = default;

    static Formula truth();
    static Formula falsity();
    static Formula static_atom(Symbol pred, std::vector<Term> args);
    static Formula fluent_atom(Symbol pred, std::vector<Term> args);
    static Formula eq(Term lhs, Term rhs);
    static Formula action_eq(ActionTerm rhs);                   // a = A(t...)
    static Formula action_eq(ActionTerm lhs, ActionTerm rhs);   // pending equation
    static Formula negation(Formula f);
    static Formula conjunction(std::vector<Formula> fs);        // empty -> true, singleton -> the element
    static Formula disjunction(std::vector<Formula> fs);        // empty -> false, singleton -> the element
    static Formula exists(Symbol var, Formula body);
    static Formula forall(Symbol var, Formula body);

    bool valid() const { return node_ != nullptr; }
    const Node &node() const { return *node_; }
    Kind kind() const { return node_->kind; }
    std::size_t hash() const { return node_->hash; }
    const void *identity() const { return node_.get(); }

    bool structurally_equal(const Formula &o) const;

    // DSL syntax, e.g. (and (On x table) (not (= x y))).
    std::string to_string() const;

private:
    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static Formula make(Node n);

    std::shared_ptr<const Node> node_;
};

struct VarSet {
    std::set<Symbol> objects;  // free object variables, ordered by name
    bool action = false;       // the free action variable occurs
};

VarSet free_vars(const Formula &f);

struct Binding {
    std::map<Symbol, Term> objects;
    std::optional<ActionTerm> action;
};

// Capture-avoiding substitution; clashing bound variables are renamed.
Formula substitute(const Formula &f, const Binding &b);

/*
  Recursive simplification: constant folding through connectives and
  quantifiers, double negation, and/or flattening and duplicate removal,
  decidable equalities, unique-names resolution of pending action equations,
  unused-binder elimination, and the one-point rule
  (exists x (and (= x t) ...) with x not free in t).
*/
Formula simplify(const Formula &f);

/*
  Canonical string key, invariant under bound-variable renaming and and/or
  child order. Negations are pushed to atoms, binders numbered by depth.
*/
std::string canonicalize(const Formula &f);

// Renames every bound variable to prefix1, prefix2, ... in traversal order,
// skipping names that occur free.
Formula standardize_apart(const Formula &f, const std::string &prefix);

}

#endif

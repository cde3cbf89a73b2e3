#include "doctest.h"

#include "gpi/domain.hpp"
#include "gpi/errors.hpp"
#include "gpi/fol.hpp"

#include "oracle.hpp"

#include <set>
#include <string>
#include <vector>

using namespace gpi;

namespace {

// Minimal vocabulary for formula round-trips: one static, two fluents.
const char *kVocab = R"((domain vocab)
(constants table)
(static (Heavy 1))
(fluent (On 2) (Clear 1))
(det-action (nop2) :poss true)
(ssa (On b1 b2) (On b1 b2))
(ssa (Clear b) (Clear b))
(stoch-action (snop) :choices ((nop2)) :prob ((nop2) (case (true 1))))
(reward (case (true 0)))
)";

const DomainSpec &vocab() {
    static DomainSpec d = parse_domain(kVocab);
    return d;
}

Formula fml(const std::string &text) { return parse_formula_text(text, vocab()); }

std::vector<Symbol> universe3() {
    return {Symbol("a"), Symbol("b"), Symbol("table")};
}

std::vector<std::pair<Symbol, std::vector<Symbol>>> on_clear_atoms() {
    std::vector<std::pair<Symbol, std::vector<Symbol>>> atoms;
    Symbol on("On"), clear("Clear");
    for (Symbol x : universe3()) {
        atoms.push_back({clear, {x}});
        for (Symbol y : universe3()) atoms.push_back({on, {x, y}});
    }
    return atoms;
}

// Raw construction helpers. Parsing runs the simplifier, so tests that
// exercise simplification must assemble their inputs from factories.
Term V(const char *n) { return Term::variable(Symbol(n)); }
Term C(const char *n) { return Term::constant(Symbol(n)); }
Formula On(const Term &a, const Term &b) {
    return Formula::fluent_atom(Symbol("On"), {a, b});
}
Formula Clr(const Term &a) { return Formula::fluent_atom(Symbol("Clear"), {a}); }
Formula Heavy(const Term &a) { return Formula::static_atom(Symbol("Heavy"), {a}); }

bool equivalent(const Formula &f, const Formula &g) {
    VarSet fv = free_vars(f);
    VarSet gv = free_vars(g);
    std::set<Symbol> names = fv.objects;
    names.insert(gv.objects.begin(), gv.objects.end());
    std::vector<Symbol> vars(names.begin(), names.end());
    std::set<std::pair<Symbol, std::vector<Symbol>>> heavy = {
        {Symbol("Heavy"), {Symbol("a")}}};
    for (const oracle::World &w :
         oracle::all_worlds(universe3(), on_clear_atoms(), heavy))
        for (const oracle::Env &env : oracle::all_envs(vars, w.universe))
            if (oracle::eval(f, w, env) != oracle::eval(g, w, env)) return false;
    return true;
}

}

TEST_CASE("parsed terms follow the declared-constant convention") {
    Formula f = fml("(On x table)");
    CHECK(f.node().args[0].is_variable());
    CHECK(f.node().args[1].is_constant());
}

TEST_CASE("free variable collection sees through binders and equalities") {
    Formula f = fml("(exists (x) (and (On x y) (= z table)))");
    VarSet fv = free_vars(f);
    CHECK(fv.objects == std::set<Symbol>{Symbol("y"), Symbol("z")});
    CHECK_FALSE(fv.action);

    Formula g = fml("(forall (y) (On y y))");
    CHECK(free_vars(g).objects.empty());
}

TEST_CASE("substitution replaces free occurrences only") {
    Formula f = fml("(and (Clear x) (exists (x) (On x table)))");
    Binding b;
    b.objects[Symbol("x")] = Term::constant(Symbol("a"));
    Formula g = substitute(f, b);
    // Free x became a; the bound x inside the quantifier is untouched.
    CHECK(g.to_string() == "(and (Clear a) (exists (x) (On x table)))");
}

TEST_CASE("substitution renames binders that would capture") {
    // Substituting y := x under (exists (x) ...) must not capture.
    Formula f = fml("(exists (x) (On x y))");
    Binding b;
    b.objects[Symbol("y")] = Term::variable(Symbol("x"));
    Formula g = substitute(f, b);
    VarSet fv = free_vars(g);
    CHECK(fv.objects == std::set<Symbol>{Symbol("x")});
    // The result must NOT be the degenerate (exists (x) (On x x)).
    Formula wrong = fml("(exists (x) (On x x))");
    CHECK_FALSE(equivalent(g, wrong));
}

TEST_CASE("simplification preserves meaning on an exhaustive catalog") {
    Symbol u("u"), v("v");
    Formula Onxy = On(V("x"), V("y"));
    Formula Onyx = On(V("y"), V("x"));
    Formula Clrx = Clr(V("x"));
    std::vector<Formula> catalog = {
        Formula::conjunction({Onxy, Formula::truth()}),
        Formula::disjunction({Onxy, Formula::falsity()}),
        Formula::conjunction({Onxy, Formula::negation(Onxy)}),
        Formula::disjunction({Clrx, Formula::negation(Clrx)}),
        Formula::negation(Formula::negation(On(V("x"), C("table")))),
        Formula::exists(u, Formula::conjunction(
                               {Formula::eq(V("u"), V("x")), On(V("u"), V("y"))})),
        Formula::exists(u, Formula::conjunction(
                               {Formula::eq(V("x"), V("u")), On(V("u"), V("y"))})),
        Formula::forall(u, Formula::disjunction(
                               {Formula::negation(Formula::eq(V("u"), V("x"))),
                                Clr(V("u"))})),
        Formula::exists(u, Clr(C("table"))),
        Formula::forall(
            u, Formula::exists(v, Formula::disjunction(
                                      {On(V("u"), V("v")),
                                       Formula::negation(On(V("u"), V("v")))}))),
        Formula::conjunction(
            {Heavy(V("x")),
             Formula::conjunction({Clrx, Formula::conjunction({Onxy, Clrx})})}),
        Formula::disjunction({Formula::disjunction({Onxy, Onyx}), Onxy}),
        Formula::exists(
            u, Formula::exists(v, Formula::conjunction({Formula::eq(V("u"), V("v")),
                                                        On(V("u"), V("v"))}))),
        Formula::negation(Formula::exists(
            u, Formula::conjunction({Clr(V("u")), Formula::negation(Clr(V("u")))}))),
        Formula::exists(u, Formula::eq(V("u"), V("u"))),
        Formula::forall(u, Formula::negation(Formula::eq(V("u"), V("u")))),
    };
    for (const Formula &f : catalog) {
        CAPTURE(f.to_string());
        Formula s = simplify(f);
        CHECK(equivalent(f, s));
        // Idempotence: a second pass finds nothing new.
        CHECK(simplify(s).to_string() == s.to_string());
    }
}

TEST_CASE("simplification folds decidable structure") {
    Symbol u("u");
    Formula Onxy = On(V("x"), V("y"));
    Formula Clrx = Clr(V("x"));
    CHECK(simplify(Formula::conjunction({Onxy, Formula::negation(Onxy)})).kind() ==
          Formula::Kind::FALSE_CONST);
    CHECK(simplify(Formula::disjunction({Clrx, Formula::negation(Clrx)})).kind() ==
          Formula::Kind::TRUE_CONST);
    CHECK(simplify(Formula::eq(C("table"), C("table"))).kind() ==
          Formula::Kind::TRUE_CONST);
    // One-point rule, with the bound variable on either side of the equation.
    CHECK(simplify(Formula::exists(
                       u, Formula::conjunction({Formula::eq(V("u"), C("table")),
                                                Clr(V("u"))})))
              .to_string() == "(Clear table)");
    CHECK(simplify(Formula::exists(
                       u, Formula::conjunction({Formula::eq(C("table"), V("u")),
                                                Clr(V("u"))})))
              .to_string() == "(Clear table)");
    // A binder nothing refers to disappears.
    CHECK(simplify(Formula::exists(u, Clr(V("x")))).to_string() == "(Clear x)");
}

TEST_CASE("pending action equations resolve by name and arity") {
    DomainSpec d = parse_domain(kVocab);
    // A pending equation between distinct action symbols is false.
    Formula diff = Formula::action_eq(
        ActionTerm{Symbol("other"), {}},
        ActionTerm{Symbol("nop2"), {}});
    CHECK(simplify(diff).kind() == Formula::Kind::FALSE_CONST);

    // Same symbol: argument equations remain.
    Formula same = Formula::action_eq(
        ActionTerm{Symbol("move"), {Term::constant(Symbol("a")),
                                    Term::variable(Symbol("y"))}},
        ActionTerm{Symbol("move"), {Term::variable(Symbol("p")),
                                    Term::variable(Symbol("q"))}});
    Formula s = simplify(same);
    CHECK(s.to_string() == "(and (= a p) (= y q))");
}

TEST_CASE("simplifier survives recycled node addresses") {
    // Regression: the memo table is keyed by node address, and addresses of
    // freed intermediates can be reused by structurally different nodes.
    // This shape (action resolution inside a quantifier, then the one-point
    // rule) used to leave the bound variable free in the output.
    Symbol t("t"), b("b"), B1("B1"), T1("T1");
    Formula ae = Formula::action_eq(
        ActionTerm{Symbol("loadS"), {Term::variable(b), Term::variable(t)}});
    Formula ne = Formula::negation(Formula::exists(t, ae));
    Binding bind;
    bind.action = ActionTerm{Symbol("loadS"),
                             {Term::constant(B1), Term::constant(T1)}};
    Formula out = simplify(substitute(ne, bind));
    VarSet fv = free_vars(out);
    CHECK(fv.objects == std::set<Symbol>{b});
    CHECK(out.to_string() == "(not (= B1 b))");
}

TEST_CASE("canonical keys identify alpha-variants and child permutations") {
    Formula f1 = fml("(exists (u) (and (On u table) (Clear u)))");
    Formula f2 = fml("(exists (w) (and (Clear w) (On w table)))");
    CHECK(canonicalize(f1) == canonicalize(f2));

    Formula g1 = fml("(forall (u) (exists (v) (On u v)))");
    Formula g2 = fml("(forall (v) (exists (u) (On v u)))");
    CHECK(canonicalize(g1) == canonicalize(g2));

    // Different meaning, different key.
    Formula h1 = fml("(exists (u) (On u table))");
    Formula h2 = fml("(exists (u) (On table u))");
    CHECK(canonicalize(h1) != canonicalize(h2));
}

TEST_CASE("standardize_apart renames binders without changing meaning") {
    Formula f = fml("(and (exists (x) (On x y)) (exists (x) (Clear x)))");
    Formula g = standardize_apart(f, "w");
    CHECK(equivalent(f, g));
    // All binders got fresh names with the requested prefix.
    std::string s = g.to_string();
    CHECK(s.find("(exists (w1)") != std::string::npos);
    CHECK(s.find("(exists (w2)") != std::string::npos);
    // The free variable is untouched.
    CHECK(free_vars(g).objects == std::set<Symbol>{Symbol("y")});
}

TEST_CASE("conjunction and disjunction factories collapse degenerate arities") {
    CHECK(Formula::conjunction({}).kind() == Formula::Kind::TRUE_CONST);
    CHECK(Formula::disjunction({}).kind() == Formula::Kind::FALSE_CONST);
    Formula atom = fml("(Clear x)");
    CHECK(Formula::conjunction({atom}).to_string() == "(Clear x)");
    CHECK(Formula::disjunction({atom}).to_string() == "(Clear x)");
}

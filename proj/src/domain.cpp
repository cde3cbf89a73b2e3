#include "gpi/domain.hpp"

#include "gpi/errors.hpp"
#include "gpi/sexpr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

namespace gpi {

const DetActionDecl *DomainSpec::find_det(Symbol name) const {
    for (const auto &a : det_actions)
        if (a.name == name) return &a;
    return nullptr;
}

const SSADecl *DomainSpec::find_ssa(Symbol fluent) const {
    for (const auto &s : ssas)
        if (s.fluent == fluent) return &s;
    return nullptr;
}

const StochActionDecl *DomainSpec::find_stoch(Symbol name) const {
    for (const auto &a : stoch_actions)
        if (a.name == name) return &a;
    return nullptr;
}

const PredSig *DomainSpec::find_static(Symbol name) const {
    for (const auto &p : statics)
        if (p.name == name) return &p;
    return nullptr;
}

const PredSig *DomainSpec::find_fluent(Symbol name) const {
    for (const auto &p : fluents)
        if (p.name == name) return &p;
    return nullptr;
}

bool DomainSpec::is_constant(Symbol name) const {
    return std::find(constants.begin(), constants.end(), name) != constants.end();
}

bool GroundAtom::operator==(const GroundAtom &o) const {
    return pred == o.pred && args == o.args;
}

bool GroundAtom::operator<(const GroundAtom &o) const {
    if (pred != o.pred) return pred < o.pred;
    return std::lexicographical_compare(args.begin(), args.end(), o.args.begin(),
                                        o.args.end());
}

std::string GroundAtom::to_string() const {
    std::string s = "(";
    s += pred.str();
    for (Symbol a : args) {
        s += ' ';
        s += a.str();
    }
    s += ')';
    return s;
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const Sexpr &s) {
    if (!s.is_atom())
        raise(ErrorCode::SYNTAX, s.pos.to_string() + ": expected a number");
    const char *begin = s.atom.c_str();
    char *end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + s.atom.size())
        raise(ErrorCode::SYNTAX, s.pos.to_string() + ": malformed number '" + s.atom + "'");
    return v;
}

int parse_int(const Sexpr &s) {
    if (!s.is_atom())
        raise(ErrorCode::SYNTAX, s.pos.to_string() + ": expected an integer");
    int v = 0;
    auto res = std::from_chars(s.atom.data(), s.atom.data() + s.atom.size(), v);
    if (res.ec != std::errc() || res.ptr != s.atom.data() + s.atom.size())
        raise(ErrorCode::SYNTAX, s.pos.to_string() + ": malformed integer '" + s.atom + "'");
    return v;
}

Symbol atom_symbol(const Sexpr &s, const char *what) {
    if (!s.is_atom())
        raise(ErrorCode::SYNTAX, s.pos.to_string() + ": expected " + std::string(what));
    return Symbol(s.atom);
}

// Shared predicate/constant context for formula parsing.
struct FormulaCtx {
    std::set<Symbol> constants;
    std::map<Symbol, int> statics;
    std::map<Symbol, int> fluents;
    std::map<Symbol, int> det_actions;  // name -> arity, for act= terms
};

Term parse_term(const Sexpr &s, const FormulaCtx &ctx) {
    Symbol name = atom_symbol(s, "a term");
    if (ctx.constants.count(name)) return Term::constant(name);
    return Term::variable(name);
}

ActionTerm parse_action_term(const Sexpr &s, const FormulaCtx &ctx) {
    if (!s.is_list() || s.size() < 1 || !s.at(0).is_atom())
        raise(ErrorCode::SYNTAX, s.pos.to_string() + ": expected an action term (A t...)");
    ActionTerm a;
    a.symbol = Symbol(s.at(0).atom);
    auto it = ctx.det_actions.find(a.symbol);
    if (it == ctx.det_actions.end())
        raise(ErrorCode::UNKNOWN_SYMBOL,
              s.pos.to_string() + ": unknown deterministic action '" + a.symbol.str() + "'");
    if (static_cast<int>(s.size()) - 1 != it->second)
        raise(ErrorCode::ARITY, s.pos.to_string() + ": action '" + a.symbol.str() +
                                    "' takes " + std::to_string(it->second) + " arguments");
    for (std::size_t i = 1; i < s.size(); i++) a.args.push_back(parse_term(s.at(i), ctx));
    return a;
}

Formula parse_formula_rec(const Sexpr &s, const FormulaCtx &ctx) {
    if (s.is_atom()) {
        if (s.atom == "true") return Formula::truth();
        if (s.atom == "false") return Formula::falsity();
        raise(ErrorCode::SYNTAX, s.pos.to_string() + ": expected a formula, got '" + s.atom + "'");
    }
    if (s.size() == 0)
        raise(ErrorCode::SYNTAX, s.pos.to_string() + ": empty form is not a formula");
    if (!s.at(0).is_atom())
        raise(ErrorCode::SYNTAX, s.pos.to_string() + ": formula head must be an atom");
    const std::string &head = s.at(0).atom;
    if (head == "and" || head == "or") {
        std::vector<Formula> kids;
        for (std::size_t i = 1; i < s.size(); i++)
            kids.push_back(parse_formula_rec(s.at(i), ctx));
        return head == "and" ? Formula::conjunction(std::move(kids))
                             : Formula::disjunction(std::move(kids));
    }
    if (head == "not") {
        if (s.size() != 2)
            raise(ErrorCode::SYNTAX, s.pos.to_string() + ": (not f) takes one formula");
        return Formula::negation(parse_formula_rec(s.at(1), ctx));
    }
    if (head == "exists" || head == "forall") {
        if (s.size() != 3 || !s.at(1).is_list() || s.at(1).size() == 0)
            raise(ErrorCode::SYNTAX,
                  s.pos.to_string() + ": expected (" + head + " (x...) f)");
        std::vector<Symbol> vars;
        for (std::size_t i = 0; i < s.at(1).size(); i++) {
            Symbol v = atom_symbol(s.at(1).at(i), "a variable");
            if (ctx.constants.count(v))
                raise(ErrorCode::SYNTAX, s.at(1).at(i).pos.to_string() +
                                             ": binder '" + v.str() + "' shadows a constant");
            vars.push_back(v);
        }
        Formula body = parse_formula_rec(s.at(2), ctx);
        for (auto it = vars.rbegin(); it != vars.rend(); ++it)
            body = head == "exists" ? Formula::exists(*it, std::move(body))
                                    : Formula::forall(*it, std::move(body));
        return body;
    }
    if (head == "=") {
        if (s.size() != 3)
            raise(ErrorCode::SYNTAX, s.pos.to_string() + ": (= t u) takes two terms");
        return Formula::eq(parse_term(s.at(1), ctx), parse_term(s.at(2), ctx));
    }
    if (head == "act=") {
        if (s.size() == 2) return Formula::action_eq(parse_action_term(s.at(1), ctx));
        if (s.size() == 3)
            return Formula::action_eq(parse_action_term(s.at(1), ctx),
                                      parse_action_term(s.at(2), ctx));
        raise(ErrorCode::SYNTAX, s.pos.to_string() + ": (act= ...) takes one or two action terms");
    }
    // Predicate atom.
    Symbol pred = Symbol(head);
    int arity = -1;
    bool fluent = false;
    if (auto it = ctx.statics.find(pred); it != ctx.statics.end()) {
        arity = it->second;
    } else if (auto it2 = ctx.fluents.find(pred); it2 != ctx.fluents.end()) {
        arity = it2->second;
        fluent = true;
    } else {
        raise(ErrorCode::UNKNOWN_SYMBOL,
              s.pos.to_string() + ": unknown predicate '" + head + "'");
    }
    if (static_cast<int>(s.size()) - 1 != arity)
        raise(ErrorCode::ARITY, s.pos.to_string() + ": predicate '" + head + "' takes " +
                                    std::to_string(arity) + " arguments");
    std::vector<Term> args;
    for (std::size_t i = 1; i < s.size(); i++) args.push_back(parse_term(s.at(i), ctx));
    return fluent ? Formula::fluent_atom(pred, std::move(args))
                  : Formula::static_atom(pred, std::move(args));
}

void collect_names(const Formula &f, std::set<std::string> &out) {
    const Formula::Node &n = f.node();
    if (n.pred.valid()) out.insert(n.pred.str());
    for (const Term &t : n.args) out.insert(t.name.str());
    auto visit_action = [&](const ActionTerm &a) {
        out.insert(a.symbol.str());
        for (const Term &t : a.args) out.insert(t.name.str());
    };
    if (n.eq_lhs) visit_action(*n.eq_lhs);
    if (n.kind == Formula::Kind::ACTION_EQ) visit_action(n.eq_rhs);
    if (n.var.valid()) out.insert(n.var.str());
    for (const Formula &k : n.kids) collect_names(k, out);
}

/*
  Renames any binder that shadows an enclosing binder of the same name to a
  globally fresh primed name, so no two quantifiers on one path share a name.
  Idempotent, so printed formulas reparse to themselves.
*/
class Freshener {
public:
    explicit Freshener(const Formula &f) {
        collect_names(f, taken_);
    }

    Formula rec(const Formula &f) {
        const Formula::Node &n = f.node();
        switch (n.kind) {
        case Formula::Kind::TRUE_CONST:
        case Formula::Kind::FALSE_CONST:
            return f;
        case Formula::Kind::STATIC_ATOM:
        case Formula::Kind::FLUENT_ATOM: {
            std::vector<Term> args;
            for (const Term &t : n.args) args.push_back(term(t));
            return n.kind == Formula::Kind::STATIC_ATOM
                       ? Formula::static_atom(n.pred, std::move(args))
                       : Formula::fluent_atom(n.pred, std::move(args));
        }
        case Formula::Kind::EQ:
            return Formula::eq(term(n.args[0]), term(n.args[1]));
        case Formula::Kind::ACTION_EQ: {
            ActionTerm rhs = action(n.eq_rhs);
            if (n.eq_lhs) return Formula::action_eq(action(*n.eq_lhs), std::move(rhs));
            return Formula::action_eq(std::move(rhs));
        }
        case Formula::Kind::NOT:
            return Formula::negation(rec(n.kids[0]));
        case Formula::Kind::AND:
        case Formula::Kind::OR: {
            std::vector<Formula> kids;
            for (const Formula &k : n.kids) kids.push_back(rec(k));
            return n.kind == Formula::Kind::AND ? Formula::conjunction(std::move(kids))
                                                : Formula::disjunction(std::move(kids));
        }
        case Formula::Kind::EXISTS:
        case Formula::Kind::FORALL: {
            Symbol v = n.var;
            Symbol fresh = v;
            if (path_.count(v)) {
                std::string name = v.str();
                do {
                    name += '\'';
                } while (taken_.count(name));
                taken_.insert(name);
                fresh = Symbol(name);
            }
            auto saved = ren_.find(v) != ren_.end() ? std::optional<Symbol>(ren_[v])
                                                    : std::nullopt;
            if (fresh != v)
                ren_[v] = fresh;
            else
                ren_.erase(v);
            bool inserted = path_.insert(fresh).second;
            Formula body = rec(n.kids[0]);
            if (inserted) path_.erase(fresh);
            if (saved)
                ren_[v] = *saved;
            else
                ren_.erase(v);
            return n.kind == Formula::Kind::EXISTS ? Formula::exists(fresh, std::move(body))
                                                   : Formula::forall(fresh, std::move(body));
        }
        }
        raise(ErrorCode::SORT, "unreachable formula kind");
    }

private:
    std::set<std::string> taken_;
    std::set<Symbol> path_;
    std::map<Symbol, Symbol> ren_;

    Term term(const Term &t) {
        if (t.is_variable()) {
            auto it = ren_.find(t.name);
            if (it != ren_.end()) return Term::variable(it->second);
        }
        return t;
    }

    ActionTerm action(const ActionTerm &a) {
        ActionTerm out;
        out.symbol = a.symbol;
        for (const Term &t : a.args) out.args.push_back(term(t));
        return out;
    }
};

Formula parse_formula_full(const Sexpr &s, const FormulaCtx &ctx) {
    Formula raw = parse_formula_rec(s, ctx);
    Freshener fr(raw);
    return simplify(fr.rec(raw));
}

CaseStatement parse_case(const Sexpr &s, const FormulaCtx &ctx) {
    if (!s.is_list() || s.size() < 2 || !s.at(0).is_atom() || s.at(0).atom != "case")
        raise(ErrorCode::SYNTAX, s.pos.to_string() + ": expected (case (GUARD v) ...)");
    CaseStatement out;
    for (std::size_t i = 1; i < s.size(); i++) {
        const Sexpr &br = s.at(i);
        if (!br.is_list() || br.size() != 2)
            raise(ErrorCode::SYNTAX, br.pos.to_string() + ": case branch must be (GUARD v)");
        CaseBranch b;
        b.guard = parse_formula_full(br.at(0), ctx);
        b.value = parse_double(br.at(1));
        out.branches.push_back(std::move(b));
    }
    return out;
}

FormulaCtx make_ctx(const DomainSpec &spec, const std::vector<Symbol> &extra) {
    FormulaCtx ctx;
    for (Symbol c : spec.constants) ctx.constants.insert(c);
    for (Symbol c : extra) ctx.constants.insert(c);
    for (const auto &p : spec.statics) ctx.statics[p.name] = p.arity;
    for (const auto &p : spec.fluents) ctx.fluents[p.name] = p.arity;
    for (const auto &a : spec.det_actions)
        ctx.det_actions[a.name] = static_cast<int>(a.params.size());
    return ctx;
}

// Parses a (Name x y ...) header into a symbol plus distinct parameter names.
void parse_header(const Sexpr &s, const char *what, Symbol &name,
                  std::vector<Symbol> &params) {
    if (!s.is_list() || s.size() < 1)
        raise(ErrorCode::SYNTAX, s.pos.to_string() + ": expected (" + std::string(what) + " x...)");
    name = atom_symbol(s.at(0), what);
    std::set<Symbol> seen;
    for (std::size_t i = 1; i < s.size(); i++) {
        Symbol p = atom_symbol(s.at(i), "a parameter");
        if (!seen.insert(p).second)
            raise(ErrorCode::DUPLICATE,
                  s.at(i).pos.to_string() + ": duplicate parameter '" + p.str() + "'");
        params.push_back(p);
    }
}

}

DomainSpec parse_domain(const std::string &text) {
    std::vector<Sexpr> forms = parse_sexprs(text);
    DomainSpec spec;

    struct PendingDet {
        const Sexpr *poss = nullptr;
    };
    struct PendingStoch {
        const Sexpr *choices = nullptr;
        std::vector<const Sexpr *> prob_pairs;
    };
    std::vector<PendingDet> det_pending;
    std::vector<PendingStoch> stoch_pending;
    std::vector<const Sexpr *> ssa_bodies;
    const Sexpr *reward_form = nullptr;
    std::set<Symbol> action_names;
    std::set<Symbol> pred_names;
    bool saw_name = false;

    // Pass 1: collect declarations; formulas wait until all symbols are known.
    for (const Sexpr &form : forms) {
        if (!form.is_list() || form.size() == 0 || !form.at(0).is_atom())
            raise(ErrorCode::SYNTAX, form.pos.to_string() + ": expected a declaration form");
        const std::string &head = form.at(0).atom;
        if (head == "domain") {
            if (saw_name)
                raise(ErrorCode::DUPLICATE, form.pos.to_string() + ": duplicate (domain ...)");
            if (form.size() != 2)
                raise(ErrorCode::SYNTAX, form.pos.to_string() + ": expected (domain NAME)");
            spec.name = atom_symbol(form.at(1), "a domain name").str();
            saw_name = true;
        } else if (head == "constants") {
            for (std::size_t i = 1; i < form.size(); i++) {
                Symbol c = atom_symbol(form.at(i), "a constant");
                if (spec.is_constant(c))
                    raise(ErrorCode::DUPLICATE,
                          form.at(i).pos.to_string() + ": duplicate constant '" + c.str() + "'");
                spec.constants.push_back(c);
            }
        } else if (head == "static" || head == "fluent") {
            for (std::size_t i = 1; i < form.size(); i++) {
                const Sexpr &sig = form.at(i);
                if (!sig.is_list() || sig.size() != 2)
                    raise(ErrorCode::SYNTAX, sig.pos.to_string() + ": expected (P arity)");
                PredSig p;
                p.name = atom_symbol(sig.at(0), "a predicate name");
                p.arity = parse_int(sig.at(1));
                if (p.arity < 0)
                    raise(ErrorCode::SYNTAX, sig.pos.to_string() + ": negative arity");
                if (!pred_names.insert(p.name).second)
                    raise(ErrorCode::DUPLICATE,
                          sig.pos.to_string() + ": duplicate predicate '" + p.name.str() + "'");
                (head == "static" ? spec.statics : spec.fluents).push_back(p);
            }
        } else if (head == "det-action") {
            if (form.size() != 4 || !form.at(2).is_atom() || form.at(2).atom != ":poss")
                raise(ErrorCode::SYNTAX,
                      form.pos.to_string() + ": expected (det-action (A x...) :poss FORMULA)");
            DetActionDecl d;
            parse_header(form.at(1), "an action name", d.name, d.params);
            if (!action_names.insert(d.name).second)
                raise(ErrorCode::DUPLICATE,
                      form.pos.to_string() + ": duplicate action '" + d.name.str() + "'");
            spec.det_actions.push_back(std::move(d));
            det_pending.push_back({&form.at(3)});
        } else if (head == "ssa") {
            if (form.size() != 3)
                raise(ErrorCode::SYNTAX,
                      form.pos.to_string() + ": expected (ssa (F x...) FORMULA)");
            SSADecl s;
            parse_header(form.at(1), "a fluent name", s.fluent, s.params);
            for (const SSADecl &prev : spec.ssas)
                if (prev.fluent == s.fluent)
                    raise(ErrorCode::DUPLICATE, form.pos.to_string() + ": two ssa forms for '" +
                                                    s.fluent.str() + "'");
            spec.ssas.push_back(std::move(s));
            ssa_bodies.push_back(&form.at(2));
        } else if (head == "stoch-action") {
            if (form.size() < 6 || !form.at(2).is_atom() || form.at(2).atom != ":choices" ||
                !form.at(4).is_atom() || form.at(4).atom != ":prob")
                raise(ErrorCode::SYNTAX,
                      form.pos.to_string() +
                          ": expected (stoch-action (B x...) :choices (...) :prob PAIR...)");
            StochActionDecl d;
            parse_header(form.at(1), "an action name", d.name, d.params);
            if (!action_names.insert(d.name).second)
                raise(ErrorCode::DUPLICATE,
                      form.pos.to_string() + ": duplicate action '" + d.name.str() + "'");
            PendingStoch p;
            p.choices = &form.at(3);
            for (std::size_t i = 5; i < form.size(); i++) p.prob_pairs.push_back(&form.at(i));
            spec.stoch_actions.push_back(std::move(d));
            stoch_pending.push_back(std::move(p));
        } else if (head == "reward") {
            if (reward_form)
                raise(ErrorCode::DUPLICATE, form.pos.to_string() + ": duplicate (reward ...)");
            if (form.size() != 2)
                raise(ErrorCode::SYNTAX, form.pos.to_string() + ": expected (reward (case ...))");
            reward_form = &form.at(1);
        } else if (head == "noop") {
            if (form.size() != 1)
                raise(ErrorCode::SYNTAX, form.pos.to_string() + ": expected (noop)");
            spec.has_noop = true;
        } else {
            raise(ErrorCode::SYNTAX,
                  form.pos.to_string() + ": unknown declaration '" + head + "'");
        }
    }

    if (spec.has_noop) {
        Symbol na("NA");
        if (action_names.count(na))
            raise(ErrorCode::DUPLICATE, "(noop) conflicts with a declared action named NA");
        DetActionDecl det;
        det.name = na;
        det.poss = Formula::truth();
        spec.det_actions.push_back(std::move(det));
        StochActionDecl st;
        st.name = na;
        st.choices.push_back(na);
        CaseStatement cs;
        cs.branches.push_back({Formula::truth(), 1.0});
        st.probs.push_back(std::move(cs));
        spec.stoch_actions.push_back(std::move(st));
    }

    // Pass 2: resolve formulas now that every predicate and action is known.
    FormulaCtx ctx = make_ctx(spec, {});
    for (std::size_t i = 0; i < det_pending.size(); i++)
        spec.det_actions[i].poss = parse_formula_full(*det_pending[i].poss, ctx);
    for (std::size_t i = 0; i < ssa_bodies.size(); i++) {
        SSADecl &s = spec.ssas[i];
        if (!pred_names.count(s.fluent) || !ctx.fluents.count(s.fluent))
            raise(ErrorCode::UNKNOWN_SYMBOL,
                  ssa_bodies[i]->pos.to_string() + ": ssa for undeclared fluent '" +
                      s.fluent.str() + "'");
        s.body = parse_formula_full(*ssa_bodies[i], ctx);
    }
    for (std::size_t i = 0; i < stoch_pending.size(); i++) {
        StochActionDecl &d = spec.stoch_actions[i];
        const PendingStoch &p = stoch_pending[i];
        if (!p.choices->is_list() || p.choices->size() == 0)
            raise(ErrorCode::SYNTAX,
                  p.choices->pos.to_string() + ": :choices needs at least one action term");
        std::vector<ActionTerm> choice_terms;
        for (std::size_t j = 0; j < p.choices->size(); j++) {
            ActionTerm t = parse_action_term(p.choices->at(j), ctx);
            d.choices.push_back(t.symbol);
            choice_terms.push_back(std::move(t));
        }
        if (p.prob_pairs.size() != d.choices.size())
            raise(ErrorCode::SYNTAX, ":prob of '" + d.name.str() + "' must list one (CHOICE CASE) pair per choice");
        d.probs.resize(d.choices.size());
        std::vector<bool> seen(d.choices.size(), false);
        for (const Sexpr *pair : p.prob_pairs) {
            if (!pair->is_list() || pair->size() != 2)
                raise(ErrorCode::SYNTAX,
                      pair->pos.to_string() + ": expected ((A x...) (case ...))");
            ActionTerm t = parse_action_term(pair->at(0), ctx);
            int idx = -1;
            for (std::size_t j = 0; j < choice_terms.size(); j++)
                if (choice_terms[j] == t && !seen[j]) {
                    idx = static_cast<int>(j);
                    break;
                }
            if (idx < 0)
                raise(ErrorCode::UNKNOWN_SYMBOL,
                      pair->pos.to_string() + ": :prob entry does not match a choice of '" +
                          d.name.str() + "'");
            seen[idx] = true;
            d.probs[idx] = parse_case(pair->at(1), ctx);
        }
    }
    if (reward_form) spec.reward = parse_case(*reward_form, ctx);

    return spec;
}

Formula parse_formula_text(const std::string &text, const DomainSpec &domain,
                           const std::vector<Symbol> &extra_constants) {
    std::vector<Sexpr> forms = parse_sexprs(text);
    if (forms.size() != 1)
        raise(ErrorCode::SYNTAX, "expected exactly one formula");
    return parse_formula_full(forms[0], make_ctx(domain, extra_constants));
}

namespace {

GroundAtom parse_ground_atom(const Sexpr &s, const DomainSpec &domain,
                             const std::set<Symbol> &objects, bool fluent) {
    if (!s.is_list() || s.size() < 1 || !s.at(0).is_atom())
        raise(ErrorCode::SYNTAX, s.pos.to_string() + ": expected a ground atom (P c...)");
    GroundAtom g;
    g.pred = Symbol(s.at(0).atom);
    const PredSig *sig = fluent ? domain.find_fluent(g.pred) : domain.find_static(g.pred);
    if (!sig)
        raise(ErrorCode::UNKNOWN_SYMBOL,
              s.pos.to_string() + ": unknown " + (fluent ? "fluent" : "static") +
                  " predicate '" + g.pred.str() + "'");
    if (static_cast<int>(s.size()) - 1 != sig->arity)
        raise(ErrorCode::ARITY, s.pos.to_string() + ": predicate '" + g.pred.str() +
                                    "' takes " + std::to_string(sig->arity) + " arguments");
    for (std::size_t i = 1; i < s.size(); i++) {
        Symbol c = atom_symbol(s.at(i), "an object");
        if (!objects.count(c) && !domain.is_constant(c))
            raise(ErrorCode::UNKNOWN_SYMBOL,
                  s.at(i).pos.to_string() + ": undeclared object '" + c.str() + "'");
        g.args.push_back(c);
    }
    return g;
}

}

InstanceSpec parse_instance(const std::string &text, const DomainSpec &domain) {
    std::vector<Sexpr> forms = parse_sexprs(text);
    InstanceSpec inst;
    std::set<Symbol> objects;

    // Objects first so facts in any order can refer to them.
    for (const Sexpr &form : forms) {
        if (!form.is_list() || form.size() == 0 || !form.at(0).is_atom())
            raise(ErrorCode::SYNTAX, form.pos.to_string() + ": expected an instance form");
        if (form.at(0).atom != "objects") continue;
        for (std::size_t i = 1; i < form.size(); i++) {
            Symbol c = atom_symbol(form.at(i), "an object");
            if (objects.count(c) || domain.is_constant(c))
                raise(ErrorCode::DUPLICATE,
                      form.at(i).pos.to_string() + ": duplicate object '" + c.str() + "'");
            objects.insert(c);
            inst.objects.push_back(c);
        }
    }
    for (const Sexpr &form : forms) {
        const std::string &head = form.at(0).atom;
        if (head == "objects") continue;
        if (head == "static") {
            for (std::size_t i = 1; i < form.size(); i++)
                inst.statics.push_back(parse_ground_atom(form.at(i), domain, objects, false));
        } else if (head == "seed") {
            for (std::size_t i = 1; i < form.size(); i++)
                inst.seed.push_back(parse_ground_atom(form.at(i), domain, objects, true));
        } else {
            raise(ErrorCode::SYNTAX,
                  form.pos.to_string() + ": unknown instance form '" + head + "'");
        }
    }
    return inst;
}

namespace {

void check_state_formula(const Formula &f, const std::vector<Symbol> &params,
                         const std::string &where, std::vector<Diagnostic> &out) {
    VarSet fv = free_vars(f);
    if (fv.action)
        out.push_back({"E_SORT", where, "state formula mentions the action variable"});
    for (Symbol v : fv.objects)
        if (std::find(params.begin(), params.end(), v) == params.end())
            out.push_back({"E_FREE_VAR", where, "free variable '" + v.str() + "' not among parameters"});
}

}

std::vector<Diagnostic> validate(const DomainSpec &spec) {
    std::vector<Diagnostic> out;

    for (const PredSig &f : spec.fluents)
        if (!spec.find_ssa(f.name))
            out.push_back({"E_NO_SSA", "fluent " + f.name.str(), "fluent has no ssa form"});

    for (const SSADecl &s : spec.ssas) {
        const std::string where = "ssa " + s.fluent.str();
        const PredSig *sig = spec.find_fluent(s.fluent);
        if (sig && sig->arity != static_cast<int>(s.params.size()))
            out.push_back({"E_ARITY", where, "ssa parameter count differs from fluent arity"});
        VarSet fv = free_vars(s.body);
        for (Symbol v : fv.objects)
            if (std::find(s.params.begin(), s.params.end(), v) == s.params.end())
                out.push_back({"E_FREE_VAR", where,
                               "free variable '" + v.str() + "' not among fluent parameters"});
    }

    for (const DetActionDecl &d : spec.det_actions)
        check_state_formula(d.poss, d.params, d.name.str() + ".poss", out);

    for (std::size_t i = 0; i < spec.reward.branches.size(); i++)
        check_state_formula(spec.reward.branches[i].guard, {},
                            "reward branch " + std::to_string(i), out);

    for (const StochActionDecl &b : spec.stoch_actions) {
        const std::string where = "stoch-action " + b.name.str();
        std::string shared_poss;
        for (std::size_t c = 0; c < b.choices.size(); c++) {
            const DetActionDecl *det = spec.find_det(b.choices[c]);
            if (!det) {
                out.push_back({"E_UNKNOWN_SYMBOL", where,
                               "choice '" + b.choices[c].str() + "' is not a deterministic action"});
                continue;
            }
            if (det->params.size() != b.params.size()) {
                out.push_back({"E_ARITY", where,
                               "choice '" + det->name.str() + "' arity differs from the stochastic action"});
                continue;
            }
            // Applicability must be the same however nature chooses.
            Binding bind;
            for (std::size_t i = 0; i < det->params.size(); i++)
                bind.objects[det->params[i]] = Term::variable(b.params[i]);
            std::string poss_key = canonicalize(substitute(det->poss, bind));
            if (c == 0)
                shared_poss = poss_key;
            else if (poss_key != shared_poss)
                out.push_back({"E_POSS_MISMATCH", where,
                               "choices have differing preconditions"});
        }
        for (std::size_t c = 0; c < b.probs.size(); c++) {
            for (const CaseBranch &br : b.probs[c].branches) {
                if (br.value < 0.0 || br.value > 1.0)
                    out.push_back({"E_PROB_MASS", where,
                                   "probability " + fmt_double(br.value) + " outside [0,1]"});
                check_state_formula(br.guard, b.params, where + " prob guard", out);
            }
        }
        // When all choices share one guard family, the per-guard mass is checkable
        // statically; otherwise the grounded check has to do it.
        if (!b.probs.empty()) {
            std::map<std::string, double> mass;
            bool aligned = true;
            for (const CaseBranch &br : b.probs[0].branches)
                mass[canonicalize(br.guard)] = br.value;
            if (mass.size() != b.probs[0].branches.size()) aligned = false;
            for (std::size_t c = 1; aligned && c < b.probs.size(); c++) {
                if (b.probs[c].branches.size() != mass.size()) {
                    aligned = false;
                    break;
                }
                for (const CaseBranch &br : b.probs[c].branches) {
                    auto it = mass.find(canonicalize(br.guard));
                    if (it == mass.end()) {
                        aligned = false;
                        break;
                    }
                    it->second += br.value;
                }
            }
            if (aligned)
                for (const auto &[guard, total] : mass)
                    if (std::abs(total - 1.0) > 1e-9)
                        out.push_back({"W_PROB_MASS", where,
                                       "branch combination sums to " + fmt_double(total)});
        }
    }
    return out;
}

namespace {

void print_header(std::string &out, Symbol name, const std::vector<Symbol> &params) {
    out += '(';
    out += name.str();
    for (Symbol p : params) {
        out += ' ';
        out += p.str();
    }
    out += ')';
}

void print_case(std::string &out, const CaseStatement &cs) {
    out += "(case";
    for (const CaseBranch &b : cs.branches) {
        out += " (";
        out += b.guard.to_string();
        out += ' ';
        out += fmt_double(b.value);
        out += ')';
    }
    out += ')';
}

}

std::string print_domain(const DomainSpec &spec) {
    std::string out;
    if (!spec.name.empty()) out += "(domain " + spec.name + ")\n";
    if (!spec.constants.empty()) {
        out += "(constants";
        for (Symbol c : spec.constants) out += ' ' + c.str();
        out += ")\n";
    }
    auto print_sigs = [&](const char *head, const std::vector<PredSig> &sigs) {
        if (sigs.empty()) return;
        out += '(';
        out += head;
        for (const PredSig &p : sigs)
            out += " (" + p.name.str() + ' ' + std::to_string(p.arity) + ')';
        out += ")\n";
    };
    print_sigs("static", spec.statics);
    print_sigs("fluent", spec.fluents);
    const Symbol na("NA");
    for (const DetActionDecl &d : spec.det_actions) {
        if (spec.has_noop && d.name == na) continue;  // regenerated by (noop)
        out += "(det-action ";
        print_header(out, d.name, d.params);
        out += " :poss " + d.poss.to_string() + ")\n";
    }
    for (const SSADecl &s : spec.ssas) {
        out += "(ssa ";
        print_header(out, s.fluent, s.params);
        out += ' ' + s.body.to_string() + ")\n";
    }
    for (const StochActionDecl &b : spec.stoch_actions) {
        if (spec.has_noop && b.name == na) continue;
        out += "(stoch-action ";
        print_header(out, b.name, b.params);
        out += " :choices (";
        for (std::size_t c = 0; c < b.choices.size(); c++) {
            if (c) out += ' ';
            print_header(out, b.choices[c], b.params);
        }
        out += ")";
        out += " :prob";
        for (std::size_t c = 0; c < b.choices.size(); c++) {
            out += " (";
            print_header(out, b.choices[c], b.params);
            out += ' ';
            print_case(out, b.probs[c]);
            out += ')';
        }
        out += ")\n";
    }
    if (!spec.reward.branches.empty()) {
        out += "(reward ";
        print_case(out, spec.reward);
        out += ")\n";
    }
    if (spec.has_noop) out += "(noop)\n";
    return out;
}

std::string print_instance(const InstanceSpec &inst) {
    std::string out;
    if (!inst.objects.empty()) {
        out += "(objects";
        for (Symbol c : inst.objects) out += ' ' + c.str();
        out += ")\n";
    }
    if (!inst.statics.empty()) {
        out += "(static";
        for (const GroundAtom &g : inst.statics) out += ' ' + g.to_string();
        out += ")\n";
    }
    if (!inst.seed.empty()) {
        out += "(seed";
        for (const GroundAtom &g : inst.seed) out += ' ' + g.to_string();
        out += ")\n";
    }
    return out;
}

}

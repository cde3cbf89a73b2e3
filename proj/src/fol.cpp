#include "gpi/fol.hpp"

#include "gpi/errors.hpp"

#include <algorithm>
#include <unordered_map>

namespace gpi {

namespace {

void hash_combine(std::size_t &seed, std::size_t v) {
    seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

std::size_t term_hash(const Term &t) {
    std::size_t h = static_cast<std::size_t>(t.kind);
    hash_combine(h, SymbolHash()(t.name));
    return h;
}

std::size_t action_term_hash(const ActionTerm &a) {
    std::size_t h = SymbolHash()(a.symbol);
    for (const Term &t : a.args) hash_combine(h, term_hash(t));
    return h;
}

}

bool Term::operator<(const Term &o) const {
    if (kind != o.kind) return kind < o.kind;
    return name < o.name;
}

bool ActionTerm::operator==(const ActionTerm &o) const {
    return symbol == o.symbol && args == o.args;
}

Formula Formula::make(Node n) {
    std::size_t h = static_cast<std::size_t>(n.kind) * 0x9e3779b97f4a7c15ULL;
    hash_combine(h, SymbolHash()(n.pred));
    for (const Term &t : n.args) hash_combine(h, term_hash(t));
    if (n.eq_lhs) hash_combine(h, action_term_hash(*n.eq_lhs));
    if (n.kind == Kind::ACTION_EQ) hash_combine(h, action_term_hash(n.eq_rhs));
    hash_combine(h, SymbolHash()(n.var));
    for (const Formula &k : n.kids) hash_combine(h, k.hash());
    n.hash = h;
    return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::truth() {
    static Formula f = make(Node{Kind::TRUE_CONST, {}, {}, {}, {}, {}, {}, 0});
    return f;
}

Formula Formula::falsity() {
    static Formula f = make(Node{Kind::FALSE_CONST, {}, {}, {}, {}, {}, {}, 0});
    return f;
}

Formula Formula::static_atom(Symbol pred, std::vector<Term> args) {
    Node n;
    n.kind = Kind::STATIC_ATOM;
    n.pred = pred;
    n.args = std::move(args);
    return make(std::move(n));
}

Formula Formula::fluent_atom(Symbol pred, std::vector<Term> args) {
    Node n;
    n.kind = Kind::FLUENT_ATOM;
    n.pred = pred;
    n.args = std::move(args);
    return make(std::move(n));
}

Formula Formula::eq(Term lhs, Term rhs) {
    Node n;
    n.kind = Kind::EQ;
    n.args = {lhs, rhs};
    return make(std::move(n));
}

Formula Formula::action_eq(ActionTerm rhs) {
    Node n;
    n.kind = Kind::ACTION_EQ;
    n.eq_rhs = std::move(rhs);
    return make(std::move(n));
}

Formula Formula::action_eq(ActionTerm lhs, ActionTerm rhs) {
    Node n;
    n.kind = Kind::ACTION_EQ;
    n.eq_lhs = std::move(lhs);
    n.eq_rhs = std::move(rhs);
    return make(std::move(n));
}

Formula Formula::negation(Formula f) {
    Node n;
    n.kind = Kind::NOT;
    n.kids = {std::move(f)};
    return make(std::move(n));
}

Formula Formula::conjunction(std::vector<Formula> fs) {
    if (fs.empty()) return truth();
    if (fs.size() == 1) return fs[0];
    Node n;
    n.kind = Kind::AND;
    n.kids = std::move(fs);
    return make(std::move(n));
}

Formula Formula::disjunction(std::vector<Formula> fs) {
    if (fs.empty()) return falsity();
    if (fs.size() == 1) return fs[0];
    Node n;
    n.kind = Kind::OR;
    n.kids = std::move(fs);
    return make(std::move(n));
}

Formula Formula::exists(Symbol var, Formula body) {
    Node n;
    n.kind = Kind::EXISTS;
    n.var = var;
    n.kids = {std::move(body)};
    return make(std::move(n));
}

Formula Formula::forall(Symbol var, Formula body) {
    Node n;
    n.kind = Kind::FORALL;
    n.var = var;
    n.kids = {std::move(body)};
    return make(std::move(n));
}

bool Formula::structurally_equal(const Formula &o) const {
    if (node_ == o.node_) return true;
    if (!node_ || !o.node_) return false;
    const Node &a = *node_;
    const Node &b = *o.node_;
    if (a.hash != b.hash || a.kind != b.kind) return false;
    if (a.pred != b.pred || a.args != b.args || a.var != b.var) return false;
    if (a.eq_lhs.has_value() != b.eq_lhs.has_value()) return false;
    if (a.eq_lhs && !(*a.eq_lhs == *b.eq_lhs)) return false;
    if (a.kind == Kind::ACTION_EQ && !(a.eq_rhs == b.eq_rhs)) return false;
    if (a.kids.size() != b.kids.size()) return false;
    for (std::size_t i = 0; i < a.kids.size(); i++)
        if (!a.kids[i].structurally_equal(b.kids[i])) return false;
    return true;
}

namespace {

void print_action_term(const ActionTerm &a, std::string &out) {
    out += '(';
    out += a.symbol.str();
    for (const Term &t : a.args) {
        out += ' ';
        out += t.name.str();
    }
    out += ')';
}

void print_rec(const Formula &f, std::string &out) {
    const Formula::Node &n = f.node();
    switch (n.kind) {
    case Formula::Kind::TRUE_CONST:
        out += "true";
        return;
    case Formula::Kind::FALSE_CONST:
        out += "false";
        return;
    case Formula::Kind::STATIC_ATOM:
    case Formula::Kind::FLUENT_ATOM:
        out += '(';
        out += n.pred.str();
        for (const Term &t : n.args) {
            out += ' ';
            out += t.name.str();
        }
        out += ')';
        return;
    case Formula::Kind::EQ:
        out += "(= ";
        out += n.args[0].name.str();
        out += ' ';
        out += n.args[1].name.str();
        out += ')';
        return;
    case Formula::Kind::ACTION_EQ:
        out += "(act= ";
        if (n.eq_lhs) {
            print_action_term(*n.eq_lhs, out);
            out += ' ';
        }
        print_action_term(n.eq_rhs, out);
        out += ')';
        return;
    case Formula::Kind::NOT:
        out += "(not ";
        print_rec(n.kids[0], out);
        out += ')';
        return;
    case Formula::Kind::AND:
    case Formula::Kind::OR:
        out += n.kind == Formula::Kind::AND ? "(and" : "(or";
        for (const Formula &k : n.kids) {
            out += ' ';
            print_rec(k, out);
        }
        out += ')';
        return;
    case Formula::Kind::EXISTS:
    case Formula::Kind::FORALL: {
        out += n.kind == Formula::Kind::EXISTS ? "(exists (" : "(forall (";
        out += n.var.str();
        // Merge directly nested same-kind quantifiers into one binder list.
        const Formula *body = &n.kids[0];
        while (body->kind() == n.kind) {
            out += ' ';
            out += body->node().var.str();
            body = &body->node().kids[0];
        }
        out += ") ";
        print_rec(*body, out);
        out += ')';
        return;
    }
    }
}

}

std::string Formula::to_string() const {
    if (!node_) return "<invalid>";
    std::string out;
    print_rec(*this, out);
    return out;
}

namespace {

void free_vars_rec(const Formula &f, std::set<Symbol> &bound, VarSet &out) {
    const Formula::Node &n = f.node();
    auto visit_term = [&](const Term &t) {
        if (t.is_variable() && !bound.count(t.name)) out.objects.insert(t.name);
    };
    switch (n.kind) {
    case Formula::Kind::TRUE_CONST:
    case Formula::Kind::FALSE_CONST:
        return;
    case Formula::Kind::STATIC_ATOM:
    case Formula::Kind::FLUENT_ATOM:
    case Formula::Kind::EQ:
        for (const Term &t : n.args) visit_term(t);
        return;
    case Formula::Kind::ACTION_EQ:
        if (n.eq_lhs) {
            for (const Term &t : n.eq_lhs->args) visit_term(t);
        } else {
            out.action = true;
        }
        for (const Term &t : n.eq_rhs.args) visit_term(t);
        return;
    case Formula::Kind::NOT:
    case Formula::Kind::AND:
    case Formula::Kind::OR:
        for (const Formula &k : n.kids) free_vars_rec(k, bound, out);
        return;
    case Formula::Kind::EXISTS:
    case Formula::Kind::FORALL: {
        bool inserted = bound.insert(n.var).second;
        free_vars_rec(n.kids[0], bound, out);
        if (inserted) bound.erase(n.var);
        return;
    }
    }
}

}

VarSet free_vars(const Formula &f) {
    VarSet out;
    std::set<Symbol> bound;
    free_vars_rec(f, bound, out);
    return out;
}

namespace {

Term map_term(const Term &t, const Binding &b) {
    if (t.is_variable()) {
        auto it = b.objects.find(t.name);
        if (it != b.objects.end()) return it->second;
    }
    return t;
}

ActionTerm map_action_term(const ActionTerm &a, const Binding &b) {
    ActionTerm out;
    out.symbol = a.symbol;
    out.args.reserve(a.args.size());
    for (const Term &t : a.args) out.args.push_back(map_term(t, b));
    return out;
}

// Variable names occurring in the replacement terms of b.
std::set<Symbol> range_vars(const Binding &b) {
    std::set<Symbol> out;
    for (const auto &[k, t] : b.objects)
        if (t.is_variable()) out.insert(t.name);
    if (b.action)
        for (const Term &t : b.action->args)
            if (t.is_variable()) out.insert(t.name);
    return out;
}

Formula substitute_rec(const Formula &f, const Binding &b) {
    const Formula::Node &n = f.node();
    switch (n.kind) {
    case Formula::Kind::TRUE_CONST:
    case Formula::Kind::FALSE_CONST:
        return f;
    case Formula::Kind::STATIC_ATOM:
    case Formula::Kind::FLUENT_ATOM: {
        std::vector<Term> args;
        args.reserve(n.args.size());
        for (const Term &t : n.args) args.push_back(map_term(t, b));
        return n.kind == Formula::Kind::STATIC_ATOM
                   ? Formula::static_atom(n.pred, std::move(args))
                   : Formula::fluent_atom(n.pred, std::move(args));
    }
    case Formula::Kind::EQ:
        return Formula::eq(map_term(n.args[0], b), map_term(n.args[1], b));
    case Formula::Kind::ACTION_EQ: {
        ActionTerm rhs = map_action_term(n.eq_rhs, b);
        if (n.eq_lhs) return Formula::action_eq(map_action_term(*n.eq_lhs, b), std::move(rhs));
        if (b.action) return Formula::action_eq(*b.action, std::move(rhs));
        return Formula::action_eq(std::move(rhs));
    }
    case Formula::Kind::NOT:
        return Formula::negation(substitute_rec(n.kids[0], b));
    case Formula::Kind::AND:
    case Formula::Kind::OR: {
        std::vector<Formula> kids;
        kids.reserve(n.kids.size());
        for (const Formula &k : n.kids) kids.push_back(substitute_rec(k, b));
        return n.kind == Formula::Kind::AND ? Formula::conjunction(std::move(kids))
                                            : Formula::disjunction(std::move(kids));
    }
    case Formula::Kind::EXISTS:
    case Formula::Kind::FORALL: {
        Binding inner = b;
        inner.objects.erase(n.var);  // the binder shadows any outer mapping
        if (inner.objects.empty() && !inner.action) return f;
        std::set<Symbol> range = range_vars(inner);
        Symbol var = n.var;
        Formula body = n.kids[0];
        if (range.count(var)) {
            // Capture: rename this binder before substituting.
            VarSet fv = free_vars(body);
            std::string fresh = var.str();
            Symbol fresh_sym;
            do {
                fresh += '\'';
                fresh_sym = Symbol(fresh);
            } while (range.count(fresh_sym) || fv.objects.count(fresh_sym) ||
                     inner.objects.count(fresh_sym));
            inner.objects[var] = Term::variable(fresh_sym);
            var = fresh_sym;
        }
        Formula sub = substitute_rec(body, inner);
        return n.kind == Formula::Kind::EXISTS ? Formula::exists(var, std::move(sub))
                                               : Formula::forall(var, std::move(sub));
    }
    }
    raise(ErrorCode::SORT, "unreachable formula kind");
}

}

Formula substitute(const Formula &f, const Binding &b) {
    if (b.objects.empty() && !b.action) return f;
    return substitute_rec(f, b);
}

namespace {

class Simplifier {
public:
    Formula run(const Formula &f) {
        auto it = memo_.find(f.identity());
        if (it != memo_.end()) return it->second.second;
        Formula out = compute(f);
        // The key formula is retained in the entry: node addresses are only
        // unique among live nodes, so the memo must keep its keys alive.
        memo_.emplace(f.identity(), std::make_pair(f, out));
        return out;
    }

private:
    std::unordered_map<const void *, std::pair<Formula, Formula>> memo_;

    static bool contains(const std::vector<Formula> &v, const Formula &f) {
        for (const Formula &k : v)
            if (k.hash() == f.hash() && k.structurally_equal(f)) return true;
        return false;
    }

    // And/Or share flatten/dedup/complement logic; `conj` picks the polarity.
    Formula junction(const std::vector<Formula> &kids, bool conj) {
        const Formula::Kind self = conj ? Formula::Kind::AND : Formula::Kind::OR;
        std::vector<Formula> flat;
        for (const Formula &raw : kids) {
            Formula k = run(raw);
            if (k.kind() == self) {
                for (const Formula &kk : k.node().kids)
                    if (!contains(flat, kk)) flat.push_back(kk);
                continue;
            }
            if (k.kind() == Formula::Kind::TRUE_CONST) {
                if (!conj) return Formula::truth();
                continue;
            }
            if (k.kind() == Formula::Kind::FALSE_CONST) {
                if (conj) return Formula::falsity();
                continue;
            }
            if (!contains(flat, k)) flat.push_back(k);
        }
        // A complementary pair decides the whole junction.
        for (const Formula &k : flat) {
            if (k.kind() == Formula::Kind::NOT && contains(flat, k.node().kids[0]))
                return conj ? Formula::falsity() : Formula::truth();
        }
        return conj ? Formula::conjunction(std::move(flat))
                    : Formula::disjunction(std::move(flat));
    }

    // (= side other) where side is exactly the variable v; other != v.
    static bool one_point_eq(const Formula &f, Symbol v, Term &other) {
        if (f.kind() != Formula::Kind::EQ) return false;
        const auto &args = f.node().args;
        const bool l = args[0].is_variable() && args[0].name == v;
        const bool r = args[1].is_variable() && args[1].name == v;
        if (l && !r) {
            other = args[1];
            return true;
        }
        if (r && !l) {
            other = args[0];
            return true;
        }
        return false;
    }

    Formula quantifier(Symbol v, const Formula &raw_body, bool is_exists) {
        Formula g = run(raw_body);
        if (!free_vars(g).objects.count(v)) return g;  // assumes a nonempty universe
        Term other;
        if (is_exists) {
            if (one_point_eq(g, v, other)) return Formula::truth();
            if (g.kind() == Formula::Kind::AND) {
                const auto &kids = g.node().kids;
                for (std::size_t i = 0; i < kids.size(); i++) {
                    if (!one_point_eq(kids[i], v, other)) continue;
                    std::vector<Formula> rest;
                    for (std::size_t j = 0; j < kids.size(); j++)
                        if (j != i) rest.push_back(kids[j]);
                    Binding b;
                    b.objects[v] = other;
                    return run(substitute(Formula::conjunction(std::move(rest)), b));
                }
            }
            return Formula::exists(v, std::move(g));
        }
        // forall: (not (= v t)) plays the one-point role.
        auto negated_eq = [&](const Formula &f, Term &o) {
            return f.kind() == Formula::Kind::NOT && one_point_eq(f.node().kids[0], v, o);
        };
        if (negated_eq(g, other)) return Formula::falsity();
        if (g.kind() == Formula::Kind::OR) {
            const auto &kids = g.node().kids;
            for (std::size_t i = 0; i < kids.size(); i++) {
                if (!negated_eq(kids[i], other)) continue;
                std::vector<Formula> rest;
                for (std::size_t j = 0; j < kids.size(); j++)
                    if (j != i) rest.push_back(kids[j]);
                Binding b;
                b.objects[v] = other;
                return run(substitute(Formula::disjunction(std::move(rest)), b));
            }
        }
        return Formula::forall(v, std::move(g));
    }

    Formula compute(const Formula &f) {
        const Formula::Node &n = f.node();
        switch (n.kind) {
        case Formula::Kind::TRUE_CONST:
        case Formula::Kind::FALSE_CONST:
        case Formula::Kind::STATIC_ATOM:
        case Formula::Kind::FLUENT_ATOM:
            return f;
        case Formula::Kind::EQ: {
            const Term &l = n.args[0];
            const Term &r = n.args[1];
            if (l == r) return Formula::truth();
            if (l.is_constant() && r.is_constant()) return Formula::falsity();
            return f;
        }
        case Formula::Kind::ACTION_EQ: {
            if (!n.eq_lhs) return f;  // free action variable: nothing to resolve yet
            const ActionTerm &l = *n.eq_lhs;
            const ActionTerm &r = n.eq_rhs;
            if (l.symbol != r.symbol || l.args.size() != r.args.size())
                return Formula::falsity();
            std::vector<Formula> eqs;
            eqs.reserve(l.args.size());
            for (std::size_t i = 0; i < l.args.size(); i++)
                eqs.push_back(Formula::eq(l.args[i], r.args[i]));
            return run(Formula::conjunction(std::move(eqs)));
        }
        case Formula::Kind::NOT: {
            Formula g = run(n.kids[0]);
            if (g.kind() == Formula::Kind::TRUE_CONST) return Formula::falsity();
            if (g.kind() == Formula::Kind::FALSE_CONST) return Formula::truth();
            if (g.kind() == Formula::Kind::NOT) return g.node().kids[0];
            return Formula::negation(std::move(g));
        }
        case Formula::Kind::AND:
            return junction(n.kids, true);
        case Formula::Kind::OR:
            return junction(n.kids, false);
        case Formula::Kind::EXISTS:
            return quantifier(n.var, n.kids[0], true);
        case Formula::Kind::FORALL:
            return quantifier(n.var, n.kids[0], false);
        }
        raise(ErrorCode::SORT, "unreachable formula kind");
    }
};

}

Formula simplify(const Formula &f) {
    Simplifier s;
    return s.run(f);
}

namespace {

class Canonicalizer {
public:
    std::string rec(const Formula &f, bool neg) {
        const Formula::Node &n = f.node();
        switch (n.kind) {
        case Formula::Kind::TRUE_CONST:
            return neg ? "F" : "T";
        case Formula::Kind::FALSE_CONST:
            return neg ? "T" : "F";
        case Formula::Kind::STATIC_ATOM:
        case Formula::Kind::FLUENT_ATOM: {
            std::string s = neg ? "!" : "";
            s += n.pred.str();
            s += '(';
            for (std::size_t i = 0; i < n.args.size(); i++) {
                if (i) s += ',';
                s += term(n.args[i]);
            }
            s += ')';
            return s;
        }
        case Formula::Kind::EQ: {
            std::string a = term(n.args[0]);
            std::string b = term(n.args[1]);
            if (b < a) std::swap(a, b);
            return (neg ? "!=(" : "=(") + a + "," + b + ")";
        }
        case Formula::Kind::ACTION_EQ: {
            std::string s = neg ? "!a=" : "a=";
            if (n.eq_lhs) s += action(*n.eq_lhs) + "~";
            s += action(n.eq_rhs);
            return s;
        }
        case Formula::Kind::NOT:
            return rec(n.kids[0], !neg);
        case Formula::Kind::AND:
        case Formula::Kind::OR: {
            const bool conj = (n.kind == Formula::Kind::AND) != neg;
            std::vector<std::string> parts;
            parts.reserve(n.kids.size());
            for (const Formula &k : n.kids) parts.push_back(rec(k, neg));
            std::sort(parts.begin(), parts.end());
            std::string s = conj ? "&{" : "|{";
            for (std::size_t i = 0; i < parts.size(); i++) {
                if (i) s += ';';
                s += parts[i];
            }
            s += '}';
            return s;
        }
        case Formula::Kind::EXISTS:
        case Formula::Kind::FORALL: {
            const bool ex = (n.kind == Formula::Kind::EXISTS) != neg;
            auto saved = level_.find(n.var) != level_.end()
                             ? std::optional<int>(level_[n.var])
                             : std::nullopt;
            level_[n.var] = depth_++;
            std::string body = rec(n.kids[0], neg);
            depth_--;
            if (saved)
                level_[n.var] = *saved;
            else
                level_.erase(n.var);
            return (ex ? "E" : "A") + std::to_string(depth_) + ":" + body;
        }
        }
        raise(ErrorCode::SORT, "unreachable formula kind");
    }

private:
    std::map<Symbol, int> level_;
    int depth_ = 0;

    std::string term(const Term &t) {
        if (t.is_variable()) {
            auto it = level_.find(t.name);
            if (it != level_.end()) return "$" + std::to_string(it->second);
            return "?" + t.name.str();
        }
        return t.name.str();
    }

    std::string action(const ActionTerm &a) {
        std::string s = a.symbol.str();
        s += '(';
        for (std::size_t i = 0; i < a.args.size(); i++) {
            if (i) s += ',';
            s += term(a.args[i]);
        }
        s += ')';
        return s;
    }
};

}

std::string canonicalize(const Formula &f) {
    Canonicalizer c;
    return c.rec(f, false);
}

namespace {

class Standardizer {
public:
    Standardizer(const std::string &prefix, std::set<Symbol> avoid)
        : prefix_(prefix), avoid_(std::move(avoid)) {}

    Formula rec(const Formula &f) {
        const Formula::Node &n = f.node();
        switch (n.kind) {
        case Formula::Kind::TRUE_CONST:
        case Formula::Kind::FALSE_CONST:
            return f;
        case Formula::Kind::STATIC_ATOM:
        case Formula::Kind::FLUENT_ATOM: {
            std::vector<Term> args;
            args.reserve(n.args.size());
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
            kids.reserve(n.kids.size());
            for (const Formula &k : n.kids) kids.push_back(rec(k));
            return n.kind == Formula::Kind::AND ? Formula::conjunction(std::move(kids))
                                                : Formula::disjunction(std::move(kids));
        }
        case Formula::Kind::EXISTS:
        case Formula::Kind::FORALL: {
            Symbol fresh;
            do {
                fresh = Symbol(prefix_ + std::to_string(counter_++));
            } while (avoid_.count(fresh));
            auto saved = renames_.find(n.var) != renames_.end()
                             ? std::optional<Symbol>(renames_[n.var])
                             : std::nullopt;
            renames_[n.var] = fresh;
            Formula body = rec(n.kids[0]);
            if (saved)
                renames_[n.var] = *saved;
            else
                renames_.erase(n.var);
            return n.kind == Formula::Kind::EXISTS ? Formula::exists(fresh, std::move(body))
                                                   : Formula::forall(fresh, std::move(body));
        }
        }
        raise(ErrorCode::SORT, "unreachable formula kind");
    }

private:
    std::string prefix_;
    std::set<Symbol> avoid_;  // free variable names the fresh names must miss
    std::map<Symbol, Symbol> renames_;
    int counter_ = 1;

    Term term(const Term &t) {
        if (t.is_variable()) {
            auto it = renames_.find(t.name);
            if (it != renames_.end()) return Term::variable(it->second);
        }
        return t;
    }

    ActionTerm action(const ActionTerm &a) {
        ActionTerm out;
        out.symbol = a.symbol;
        out.args.reserve(a.args.size());
        for (const Term &t : a.args) out.args.push_back(term(t));
        return out;
    }
};

}

Formula standardize_apart(const Formula &f, const std::string &prefix) {
    Standardizer s(prefix, free_vars(f).objects);
    return s.rec(f);
}

}

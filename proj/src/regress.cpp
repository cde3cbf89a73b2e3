#include "gpi/regress.hpp"

#include "gpi/errors.hpp"
#include "gpi/sexpr.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <set>

namespace gpi {

namespace {

Formula repr_rec(const Formula &f, const ActionTerm &alpha,
                 const std::set<Symbol> &alpha_vars, const DomainSpec &domain) {
    const Formula::Node &n = f.node();
    switch (n.kind) {
    case Formula::Kind::TRUE_CONST:
    case Formula::Kind::FALSE_CONST:
    case Formula::Kind::STATIC_ATOM:
    case Formula::Kind::EQ:
        return f;
    case Formula::Kind::FLUENT_ATOM: {
        const SSADecl *ssa = domain.find_ssa(n.pred);
        if (!ssa)
            raise(ErrorCode::NO_SSA, "fluent '" + n.pred.str() + "' has no ssa form");
        if (ssa->params.size() != n.args.size())
            raise(ErrorCode::ARITY, "fluent '" + n.pred.str() + "' arity mismatch");
        Binding b;
        for (std::size_t i = 0; i < n.args.size(); i++)
            b.objects[ssa->params[i]] = n.args[i];
        b.action = alpha;
        return simplify(substitute(ssa->body, b));
    }
    case Formula::Kind::ACTION_EQ:
        raise(ErrorCode::SORT, "action equation inside a state formula being regressed");
    case Formula::Kind::NOT:
        return Formula::negation(repr_rec(n.kids[0], alpha, alpha_vars, domain));
    case Formula::Kind::AND:
    case Formula::Kind::OR: {
        std::vector<Formula> kids;
        kids.reserve(n.kids.size());
        for (const Formula &k : n.kids)
            kids.push_back(repr_rec(k, alpha, alpha_vars, domain));
        return n.kind == Formula::Kind::AND ? Formula::conjunction(std::move(kids))
                                            : Formula::disjunction(std::move(kids));
    }
    case Formula::Kind::EXISTS:
    case Formula::Kind::FORALL: {
        Symbol var = n.var;
        Formula body = n.kids[0];
        if (alpha_vars.count(var)) {
            // The binder would capture one of alpha's variables; rename it.
            VarSet fv = free_vars(body);
            std::string name = var.str();
            Symbol fresh;
            do {
                name += '\'';
                fresh = Symbol(name);
            } while (alpha_vars.count(fresh) || fv.objects.count(fresh));
            Binding b;
            b.objects[var] = Term::variable(fresh);
            body = substitute(body, b);
            var = fresh;
        }
        Formula sub = repr_rec(body, alpha, alpha_vars, domain);
        return n.kind == Formula::Kind::EXISTS ? Formula::exists(var, std::move(sub))
                                               : Formula::forall(var, std::move(sub));
    }
    }
    raise(ErrorCode::SORT, "unreachable formula kind");
}

}

Formula repr(const Formula &f, const ActionTerm &alpha, const DomainSpec &domain) {
    std::set<Symbol> alpha_vars;
    for (const Term &t : alpha.args)
        if (t.is_variable()) alpha_vars.insert(t.name);
    return repr_rec(f, alpha, alpha_vars, domain);
}

Formula regress_open(const Formula &phi, const DetActionDecl &action,
                     const DomainSpec &domain, std::vector<Symbol> *params_out) {
    std::vector<Symbol> params;
    params.reserve(action.params.size());
    for (std::size_t i = 0; i < action.params.size(); i++)
        params.push_back(Symbol("x" + std::to_string(i + 1)));

    // Keep phi's own binders away from the fresh parameters.
    Formula phi_r = standardize_apart(phi, "u");

    ActionTerm alpha;
    alpha.symbol = action.name;
    for (Symbol p : params) alpha.args.push_back(Term::variable(p));

    Binding poss_bind;
    for (std::size_t i = 0; i < action.params.size(); i++)
        poss_bind.objects[action.params[i]] = Term::variable(params[i]);
    Formula poss = substitute(action.poss, poss_bind);

    Formula body =
        simplify(Formula::conjunction({std::move(poss), repr(phi_r, alpha, domain)}));
    body = standardize_apart(body, "v");
    if (params_out) *params_out = std::move(params);
    return body;
}

HypothesisSpace::HypothesisSpace(const DomainSpec &domain) : domain_(&domain) {
    layers_.emplace_back();
    for (const CaseBranch &br : domain.reward.branches) {
        if (br.guard.kind() == Formula::Kind::FALSE_CONST) continue;
        Hypothesis h;
        h.depth = 0;
        h.body = br.guard;
        h.closed = br.guard;
        h.seed_value = br.value;
        h.key = canonicalize(h.closed);
        auto seen_key = std::make_tuple(0, Symbol(), h.key);
        if (seen_.count(seen_key)) continue;
        int id = add_hypothesis(std::move(h));
        seen_.emplace(std::move(seen_key), id);
    }
}

HypothesisSpace::HypothesisSpace(const DomainSpec &domain, std::vector<Hypothesis> hyps)
    : domain_(&domain) {
    for (std::size_t i = 0; i < hyps.size(); i++) {
        Hypothesis &h = hyps[i];
        if (h.id != static_cast<int>(i))
            raise(ErrorCode::SORT, "hypothesis ids must be dense and ordered");
        if (h.depth < 0 || (h.depth > 0 && (h.parent < 0 || h.parent >= h.id)))
            raise(ErrorCode::SORT, "hypothesis " + std::to_string(h.id) + " has a bad parent");
        if (h.key.empty()) h.key = canonicalize(h.closed);
        while (static_cast<int>(layers_.size()) <= h.depth) layers_.emplace_back();
        layers_[h.depth].push_back(h.id);
        seen_.emplace(std::make_tuple(h.depth, h.stoch_action, h.key), h.id);
    }
    hyps_ = std::move(hyps);
}

int HypothesisSpace::add_hypothesis(Hypothesis h) {
    h.id = static_cast<int>(hyps_.size());
    layers_.at(h.depth).push_back(h.id);
    int id = h.id;
    hyps_.push_back(std::move(h));
    return id;
}

std::vector<int> HypothesisSpace::expand_layer(int depth, const std::vector<int> *sources) {
    if (depth < 1 || depth > this->depth() + 1)
        raise(ErrorCode::SORT, "cannot expand layer " + std::to_string(depth) +
                                   " of a space of depth " + std::to_string(this->depth()));
    if (depth == static_cast<int>(layers_.size())) layers_.emplace_back();
    std::vector<int> src_ids = sources ? *sources : layers_.at(depth - 1);
    for (int sid : src_ids)
        if (hyp(sid).depth != depth - 1)
            raise(ErrorCode::SORT, "source hypothesis " + std::to_string(sid) +
                                       " is not at depth " + std::to_string(depth - 1));

    std::vector<int> out;
    std::set<int> out_seen;
    auto push = [&](int id) {
        if (out_seen.insert(id).second) out.push_back(id);
    };
    for (const StochActionDecl &stoch : domain_->stoch_actions) {
        for (Symbol choice : stoch.choices) {
            const DetActionDecl *det = domain_->find_det(choice);
            if (!det)
                raise(ErrorCode::UNKNOWN_SYMBOL,
                      "choice '" + choice.str() + "' is not a deterministic action");
            for (int sid : src_ids) {
                // Copy what we need: adding hypotheses invalidates references.
                Formula src_closed = hyp(sid).closed;
                double seed = hyp(sid).seed_value;

                Hypothesis h;
                h.depth = depth;
                h.det_action = det->name;
                h.stoch_action = stoch.name;
                h.body = regress_open(src_closed, *det, *domain_, &h.params);
                if (h.body.kind() == Formula::Kind::FALSE_CONST) continue;
                Formula closed = h.body;
                for (auto it = h.params.rbegin(); it != h.params.rend(); ++it)
                    closed = Formula::exists(*it, std::move(closed));
                h.closed = simplify(closed);
                if (h.closed.kind() == Formula::Kind::FALSE_CONST) continue;
                h.key = canonicalize(h.closed);
                h.parent = sid;
                h.seed_value = seed;

                auto seen_key = std::make_tuple(depth, stoch.name, h.key);
                auto it = seen_.find(seen_key);
                if (it != seen_.end()) {
                    push(it->second);
                    continue;
                }
                int id = add_hypothesis(std::move(h));
                seen_.emplace(std::move(seen_key), id);
                push(id);
            }
        }
    }
    return out;
}

void HypothesisSpace::generate(int n) {
    for (int d = depth() + 1; d <= n; d++) expand_layer(d);
}

namespace {

std::string fmt_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}

std::string print_hypothesis(const Hypothesis &h) {
    std::string s = "(hyp :id " + std::to_string(h.id) + " :depth " + std::to_string(h.depth);
    if (h.depth > 0) {
        s += " :det " + h.det_action.str();
        s += " :stoch " + h.stoch_action.str();
    }
    s += " :params (";
    for (std::size_t i = 0; i < h.params.size(); i++) {
        if (i) s += ' ';
        s += h.params[i].str();
    }
    s += ") :body " + h.body.to_string();
    s += " :seed " + fmt_value(h.seed_value);
    s += " :parent " + std::to_string(h.parent);
    s += ')';
    return s;
}

std::string print_hypotheses(const HypothesisSpace &space) {
    std::string out;
    for (int i = 0; i < space.size(); i++) {
        out += print_hypothesis(space.hyp(i));
        out += '\n';
    }
    return out;
}

std::vector<Hypothesis> parse_hypotheses(const std::string &text, const DomainSpec &domain) {
    std::vector<Sexpr> forms = parse_sexprs(text);
    std::vector<Hypothesis> out;
    for (const Sexpr &form : forms) {
        if (!form.is_list() || form.size() == 0 || !form.at(0).is_atom() ||
            form.at(0).atom != "hyp")
            raise(ErrorCode::SYNTAX, form.pos.to_string() + ": expected a (hyp ...) record");
        Hypothesis h;
        bool have_body = false;
        for (std::size_t i = 1; i < form.size(); i += 2) {
            if (i + 1 >= form.size() || !form.at(i).is_atom())
                raise(ErrorCode::SYNTAX,
                      form.at(i).pos.to_string() + ": expected :key value pairs");
            const std::string &key = form.at(i).atom;
            const Sexpr &val = form.at(i + 1);
            if (key == ":id") {
                h.id = std::atoi(val.atom.c_str());
            } else if (key == ":depth") {
                h.depth = std::atoi(val.atom.c_str());
            } else if (key == ":det") {
                h.det_action = Symbol(val.atom);
            } else if (key == ":stoch") {
                h.stoch_action = Symbol(val.atom);
            } else if (key == ":params") {
                if (!val.is_list())
                    raise(ErrorCode::SYNTAX, val.pos.to_string() + ": :params needs a list");
                for (std::size_t j = 0; j < val.size(); j++)
                    h.params.push_back(Symbol(val.at(j).atom));
            } else if (key == ":body") {
                h.body = parse_formula_text(print_sexpr(val), domain);
                have_body = true;
            } else if (key == ":seed") {
                h.seed_value = std::strtod(val.atom.c_str(), nullptr);
            } else if (key == ":parent") {
                h.parent = std::atoi(val.atom.c_str());
            } else {
                raise(ErrorCode::SYNTAX,
                      form.at(i).pos.to_string() + ": unknown hyp field '" + key + "'");
            }
        }
        if (!have_body)
            raise(ErrorCode::SYNTAX, form.pos.to_string() + ": hyp record lacks :body");
        Formula closed = h.body;
        for (auto it = h.params.rbegin(); it != h.params.rend(); ++it)
            closed = Formula::exists(*it, std::move(closed));
        h.closed = simplify(closed);
        h.key = canonicalize(h.closed);
        out.push_back(std::move(h));
    }
    return out;
}

}

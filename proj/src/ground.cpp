#include "gpi/ground.hpp"

#include "gpi/errors.hpp"

#include <algorithm>
#include <set>

namespace gpi {

bool State::contains(const GroundAtom &a) const {
    return std::binary_search(atoms.begin(), atoms.end(), a);
}

std::string State::to_string() const {
    std::string s = "(state";
    for (const GroundAtom &a : atoms) {
        s += ' ';
        s += a.to_string();
    }
    s += ')';
    return s;
}

bool GroundAction::operator==(const GroundAction &o) const {
    return symbol == o.symbol && args == o.args;
}

bool GroundAction::operator<(const GroundAction &o) const {
    if (symbol != o.symbol) return symbol < o.symbol;
    return std::lexicographical_compare(args.begin(), args.end(), o.args.begin(),
                                        o.args.end());
}

std::string GroundAction::to_string() const {
    std::string s = "(";
    s += symbol.str();
    for (Symbol a : args) {
        s += ' ';
        s += a.str();
    }
    s += ')';
    return s;
}

namespace {

// Applies fn to every k-tuple over universe in lexicographic order (first
// position most significant). fn returning false stops the enumeration.
template <typename Fn>
void for_each_tuple(const std::vector<Symbol> &universe, std::size_t k, Fn fn) {
    std::vector<std::size_t> idx(k, 0);
    std::vector<Symbol> tuple(k);
    if (k == 0) {
        fn(tuple);
        return;
    }
    if (universe.empty()) return;
    while (true) {
        for (std::size_t i = 0; i < k; i++) tuple[i] = universe[idx[i]];
        if (!fn(tuple)) return;
        std::size_t pos = k;
        while (pos > 0) {
            pos--;
            if (++idx[pos] < universe.size()) break;
            idx[pos] = 0;
            if (pos == 0) return;
        }
    }
}

}

struct Instance::Env {
    ObjectBinding binding;
};

Instance::Instance(const DomainSpec &domain, const InstanceSpec &spec) : domain_(&domain) {
    std::set<Symbol> universe(domain.constants.begin(), domain.constants.end());
    universe.insert(spec.objects.begin(), spec.objects.end());
    objects_.assign(universe.begin(), universe.end());

    statics_ = spec.statics;
    std::sort(statics_.begin(), statics_.end());
    statics_.erase(std::unique(statics_.begin(), statics_.end()), statics_.end());

    seed_.atoms = spec.seed;
    std::sort(seed_.atoms.begin(), seed_.atoms.end());
    seed_.atoms.erase(std::unique(seed_.atoms.begin(), seed_.atoms.end()),
                      seed_.atoms.end());

    for (const DetActionDecl &d : domain.det_actions)
        for_each_tuple(objects_, d.params.size(), [&](const std::vector<Symbol> &tuple) {
            det_actions_.push_back({d.name, tuple});
            return true;
        });
    std::sort(det_actions_.begin(), det_actions_.end());

    for (const StochActionDecl &d : domain.stoch_actions)
        for_each_tuple(objects_, d.params.size(), [&](const std::vector<Symbol> &tuple) {
            stoch_actions_.push_back({d.name, tuple});
            return true;
        });
    std::sort(stoch_actions_.begin(), stoch_actions_.end());
}

bool Instance::static_true(const GroundAtom &a) const {
    return std::binary_search(statics_.begin(), statics_.end(), a);
}

bool Instance::eval(const State &e, const Formula &f, Env &env) const {
    const Formula::Node &n = f.node();
    auto resolve = [&](const Term &t) -> Symbol {
        if (t.is_constant()) return t.name;
        auto it = env.binding.find(t.name);
        if (it == env.binding.end())
            raise(ErrorCode::UNBOUND, "unbound variable '" + t.name.str() + "'");
        return it->second;
    };
    switch (n.kind) {
    case Formula::Kind::TRUE_CONST:
        return true;
    case Formula::Kind::FALSE_CONST:
        return false;
    case Formula::Kind::STATIC_ATOM: {
        GroundAtom g;
        g.pred = n.pred;
        g.args.reserve(n.args.size());
        for (const Term &t : n.args) g.args.push_back(resolve(t));
        return static_true(g);
    }
    case Formula::Kind::FLUENT_ATOM: {
        GroundAtom g;
        g.pred = n.pred;
        g.args.reserve(n.args.size());
        for (const Term &t : n.args) g.args.push_back(resolve(t));
        return e.contains(g);
    }
    case Formula::Kind::EQ:
        return resolve(n.args[0]) == resolve(n.args[1]);
    case Formula::Kind::ACTION_EQ:
        raise(ErrorCode::SORT, "action equation in a state formula");
    case Formula::Kind::NOT:
        return !eval(e, n.kids[0], env);
    case Formula::Kind::AND:
        for (const Formula &k : n.kids)
            if (!eval(e, k, env)) return false;
        return true;
    case Formula::Kind::OR:
        for (const Formula &k : n.kids)
            if (eval(e, k, env)) return true;
        return false;
    case Formula::Kind::EXISTS:
    case Formula::Kind::FORALL: {
        auto it = env.binding.find(n.var);
        std::optional<Symbol> saved =
            it != env.binding.end() ? std::optional<Symbol>(it->second) : std::nullopt;
        bool result = n.kind == Formula::Kind::FORALL;
        for (Symbol obj : objects_) {
            env.binding[n.var] = obj;
            bool b = eval(e, n.kids[0], env);
            if (n.kind == Formula::Kind::EXISTS && b) {
                result = true;
                break;
            }
            if (n.kind == Formula::Kind::FORALL && !b) {
                result = false;
                break;
            }
        }
        if (saved)
            env.binding[n.var] = *saved;
        else
            env.binding.erase(n.var);
        return result;
    }
    }
    raise(ErrorCode::SORT, "unreachable formula kind");
}

bool Instance::holds(const State &e, const Formula &f, const ObjectBinding &binding) const {
    Env env{binding};
    eval_count_++;
    return eval(e, f, env);
}

std::vector<std::vector<Symbol>> Instance::witnesses(const State &e, const Formula &f,
                                                     const std::vector<Symbol> &vars) const {
    std::vector<std::vector<Symbol>> out;
    for_each_tuple(objects_, vars.size(), [&](const std::vector<Symbol> &tuple) {
        Env env;
        for (std::size_t i = 0; i < vars.size(); i++) env.binding[vars[i]] = tuple[i];
        eval_count_++;
        if (eval(e, f, env)) out.push_back(tuple);
        return true;
    });
    return out;
}

bool Instance::applicable(const State &e, const GroundAction &a) const {
    const DetActionDecl *d = domain_->find_det(a.symbol);
    if (!d)
        raise(ErrorCode::UNKNOWN_SYMBOL,
              "unknown deterministic action '" + a.symbol.str() + "'");
    if (d->params.size() != a.args.size())
        raise(ErrorCode::ARITY, "ground action arity mismatch for '" + a.symbol.str() + "'");
    ObjectBinding b;
    for (std::size_t i = 0; i < d->params.size(); i++) b[d->params[i]] = a.args[i];
    return holds(e, d->poss, b);
}

const Formula &Instance::resolved_ssa(Symbol fluent, const GroundAction &a) const {
    auto key = std::make_pair(fluent, a);
    auto it = ssa_cache_.find(key);
    if (it != ssa_cache_.end()) return it->second;
    const SSADecl *decl = domain_->find_ssa(fluent);
    if (!decl)
        raise(ErrorCode::NO_SSA, "fluent '" + fluent.str() + "' has no ssa form");
    Binding b;
    b.action = ActionTerm{a.symbol, {}};
    for (Symbol arg : a.args) b.action->args.push_back(Term::constant(arg));
    Formula resolved = simplify(substitute(decl->body, b));
    return ssa_cache_.emplace(std::move(key), std::move(resolved)).first->second;
}

State Instance::transition(const State &e, const GroundAction &a) const {
    if (!applicable(e, a))
        raise(ErrorCode::NOT_APPLICABLE,
              a.to_string() + " is not applicable in " + e.to_string());
    State out;
    for (const PredSig &f : domain_->fluents) {
        const SSADecl *decl = domain_->find_ssa(f.name);
        if (!decl)
            raise(ErrorCode::NO_SSA, "fluent '" + f.name.str() + "' has no ssa form");
        const Formula &body = resolved_ssa(f.name, a);
        for_each_tuple(objects_, decl->params.size(), [&](const std::vector<Symbol> &tuple) {
            Env env;
            for (std::size_t i = 0; i < tuple.size(); i++)
                env.binding[decl->params[i]] = tuple[i];
            eval_count_++;
            if (eval(e, body, env)) out.atoms.push_back({f.name, tuple});
            return true;
        });
    }
    std::sort(out.atoms.begin(), out.atoms.end());
    return out;
}

void Instance::enumerate() const {
    if (enumerated_) return;
    enumerated_ = true;
    states_.push_back(seed_);
    state_index_[seed_] = 0;
    std::size_t level_begin = 0;
    while (level_begin < states_.size()) {
        std::size_t level_end = states_.size();
        std::set<State> next_level;
        for (std::size_t i = level_begin; i < level_end; i++) {
            // states_ may reallocate only after this level; copy is cheap enough.
            State cur = states_[i];
            for (const GroundAction &a : det_actions_) {
                if (!applicable(cur, a)) continue;
                State succ = transition(cur, a);
                if (state_index_.count(succ) || next_level.count(succ)) continue;
                next_level.insert(std::move(succ));
                if (states_.size() + next_level.size() > STATE_CAP)
                    raise(ErrorCode::EXPLOSION,
                          "reachable state count exceeds " + std::to_string(STATE_CAP));
            }
        }
        for (const State &s : next_level) {
            state_index_[s] = static_cast<int>(states_.size());
            states_.push_back(s);
        }
        level_begin = level_end;
    }
}

const std::vector<State> &Instance::states() const {
    enumerate();
    return states_;
}

int Instance::state_index(const State &e) const {
    enumerate();
    auto it = state_index_.find(e);
    return it == state_index_.end() ? -1 : it->second;
}

double Instance::case_value(const State &e, const CaseStatement &cs) const {
    int hits = 0;
    double value = 0.0;
    for (const CaseBranch &b : cs.branches) {
        if (holds(e, b.guard)) {
            hits++;
            if (hits == 1) value = b.value;
        }
    }
    if (hits != 1)
        raise(ErrorCode::PARTITION, "case guards matched " + std::to_string(hits) +
                                        " times in " + e.to_string());
    return value;
}

std::vector<Diagnostic> Instance::check_partition(const CaseStatement &cs,
                                                  const std::string &where) const {
    std::vector<Diagnostic> out;
    for (const State &e : states()) {
        int hits = 0;
        for (const CaseBranch &b : cs.branches)
            if (holds(e, b.guard)) hits++;
        if (hits != 1)
            out.push_back({"E_PARTITION", where,
                           "guards matched " + std::to_string(hits) + " times in " +
                               e.to_string()});
    }
    return out;
}

}

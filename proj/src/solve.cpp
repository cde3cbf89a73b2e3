#include "gpi/solve.hpp"

#include "gpi/errors.hpp"
#include "gpi/sexpr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>

namespace gpi {

namespace {

// Evaluates a probability case whose guards may mention the action parameters.
double case_value_bound(const Instance &inst, const State &e, const CaseStatement &cs,
                        const ObjectBinding &binding) {
    int hits = 0;
    double value = 0.0;
    for (const CaseBranch &b : cs.branches) {
        if (inst.holds(e, b.guard, binding)) {
            hits++;
            if (hits == 1) value = b.value;
        }
    }
    if (hits != 1)
        raise(ErrorCode::PARTITION,
              "probability case guards matched " + std::to_string(hits) + " times");
    return value;
}

}

GroundMDP GroundMDP::build(const Instance &inst) {
    GroundMDP m;
    m.instance = &inst;
    const DomainSpec &domain = inst.domain();
    const std::vector<State> &states = inst.states();
    m.reward.resize(states.size());
    m.actions.resize(states.size());

    for (std::size_t i = 0; i < states.size(); i++) {
        const State &e = states[i];
        m.reward[i] = inst.case_value(e, domain.reward);
        for (const GroundAction &ga : inst.ground_stoch_actions()) {
            const StochActionDecl *decl = domain.find_stoch(ga.symbol);
            if (!decl)
                raise(ErrorCode::UNKNOWN_SYMBOL,
                      "unknown stochastic action '" + ga.symbol.str() + "'");
            // All choices share one precondition; the first stands for it.
            GroundAction first{decl->choices[0], ga.args};
            if (!inst.applicable(e, first)) continue;

            ObjectBinding bind;
            for (std::size_t p = 0; p < decl->params.size(); p++)
                bind[decl->params[p]] = ga.args[p];

            std::map<int, double> mass;
            double total = 0.0;
            for (std::size_t c = 0; c < decl->choices.size(); c++) {
                double p = case_value_bound(inst, e, decl->probs[c], bind);
                total += p;
                if (p <= 0.0) continue;
                State succ = inst.transition(e, {decl->choices[c], ga.args});
                int j = inst.state_index(succ);
                if (j < 0)
                    raise(ErrorCode::EXPLOSION,
                          "successor of " + e.to_string() + " escaped the enumerated space");
                mass[j] += p;
            }
            if (std::abs(total - 1.0) > 1e-9)
                raise(ErrorCode::PROB_MASS,
                      ga.to_string() + " puts mass " + std::to_string(total) + " in " +
                          e.to_string());
            StochOutcome o;
            o.action = ga;
            for (const auto &[j, p] : mass) o.transitions.push_back({j, p});
            m.actions[i].push_back(std::move(o));
        }
    }
    return m;
}

ValueTable value_iteration(const GroundMDP &mdp, double beta, double tol, double snap_eps) {
    const std::size_t n = mdp.reward.size();
    for (std::size_t i = 0; i < n; i++)
        if (mdp.actions[i].empty())
            raise(ErrorCode::NO_ACTION,
                  "state " + std::to_string(i) + " has no applicable stochastic action");

    ValueTable vt;
    vt.value.assign(n, 0.0);
    std::vector<double> next(n, 0.0);
    const int cap = 100000;
    while (vt.iterations < cap) {
        double residual = 0.0;
        for (std::size_t i = 0; i < n; i++) {
            double best = -1e300;
            for (const StochOutcome &o : mdp.actions[i]) {
                double q = 0.0;
                for (const Transition &t : o.transitions) q += t.prob * vt.value[t.succ];
                if (q > best) best = q;
            }
            next[i] = mdp.reward[i] + beta * best;
            residual = std::max(residual, std::abs(next[i] - vt.value[i]));
        }
        vt.value.swap(next);
        vt.iterations++;
        if (residual <= tol) break;
        if (vt.iterations == cap)
            raise(ErrorCode::EXPLOSION, "value iteration did not converge");
    }

    // Snap values within snap_eps of each other to a shared representative
    // (the cluster minimum) so "distinct values" is well defined.
    std::vector<std::pair<double, std::size_t>> order(n);
    for (std::size_t i = 0; i < n; i++) order[i] = {vt.value[i], i};
    std::sort(order.begin(), order.end());
    vt.snapped.assign(n, 0.0);
    double rep = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < n; k++) {
        if (k == 0 || order[k].first - prev > snap_eps) {
            rep = order[k].first;
            vt.ladder.push_back(rep);
        }
        prev = order[k].first;
        vt.snapped[order[k].second] = rep;
    }
    std::reverse(vt.ladder.begin(), vt.ladder.end());
    return vt;
}

double q_value(const GroundMDP &mdp, const ValueTable &vt, double beta, int state,
               const StochOutcome &outcome) {
    double q = 0.0;
    for (const Transition &t : outcome.transitions) q += t.prob * vt.value[t.succ];
    return mdp.reward[state] + beta * q;
}

GroundAction greedy_action(const GroundMDP &mdp, const ValueTable &vt, double beta,
                           int state) {
    const std::vector<StochOutcome> &outcomes = mdp.actions.at(state);
    if (outcomes.empty())
        raise(ErrorCode::NO_ACTION,
              "state " + std::to_string(state) + " has no applicable stochastic action");
    const StochOutcome *best = &outcomes[0];
    double best_q = q_value(mdp, vt, beta, state, outcomes[0]);
    for (std::size_t k = 1; k < outcomes.size(); k++) {
        double q = q_value(mdp, vt, beta, state, outcomes[k]);
        if (q > best_q) {
            best_q = q;
            best = &outcomes[k];
        }
    }
    return best->action;
}

bool goal_guard(const Instance &inst, const State &e) {
    const CaseStatement &reward = inst.domain().reward;
    if (reward.branches.empty()) return false;
    double maxv = reward.branches[0].value;
    for (const CaseBranch &b : reward.branches) maxv = std::max(maxv, b.value);
    for (const CaseBranch &b : reward.branches)
        if (b.value == maxv && inst.holds(e, b.guard)) return true;
    return false;
}

std::vector<Example> make_examples(const GroundMDP &mdp, const ValueTable &vt, double beta,
                                   ExampleKind kind, const std::vector<int> *starts) {
    const Instance &inst = *mdp.instance;
    const std::vector<State> &states = inst.states();
    std::vector<int> all;
    if (!starts) {
        all.resize(states.size());
        for (std::size_t i = 0; i < states.size(); i++) all[i] = static_cast<int>(i);
        starts = &all;
    }

    std::vector<Example> out;
    if (kind == ExampleKind::P) {
        for (int i : *starts)
            out.push_back({vt.snapped[i], greedy_action(mdp, vt, beta, i), states[i]});
        return out;
    }

    const DomainSpec &domain = inst.domain();
    std::set<int> recorded;
    for (int start : *starts) {
        int cur = start;
        std::set<int> visited;
        std::set<double> seen_values;
        std::size_t steps = 0;
        while (steps++ <= states.size()) {
            if (recorded.insert(cur).second)
                out.push_back({vt.snapped[cur], greedy_action(mdp, vt, beta, cur),
                               states[cur]});
            visited.insert(cur);
            seen_values.insert(vt.snapped[cur]);

            GroundAction a = greedy_action(mdp, vt, beta, cur);
            const StochActionDecl *decl = domain.find_stoch(a.symbol);
            ObjectBinding bind;
            for (std::size_t p = 0; p < decl->params.size(); p++)
                bind[decl->params[p]] = a.args[p];
            // Walk nature's most likely choice; earlier declarations win ties.
            std::size_t best_c = 0;
            double best_p = -1.0;
            for (std::size_t c = 0; c < decl->choices.size(); c++) {
                double p = case_value_bound(inst, states[cur], decl->probs[c], bind);
                if (p > best_p) {
                    best_p = p;
                    best_c = c;
                }
            }
            State succ_state = inst.transition(states[cur], {decl->choices[best_c], a.args});
            int succ = inst.state_index(succ_state);
            if (succ < 0 || goal_guard(inst, succ_state)) break;
            if (seen_values.count(vt.snapped[succ])) break;
            if (visited.count(succ)) break;
            cur = succ;
        }
    }
    return out;
}

namespace {

std::string fmt_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}

std::string print_examples(const std::vector<Example> &examples) {
    std::string out;
    for (const Example &ex : examples) {
        out += "(example :value ";
        out += fmt_value(ex.value);
        out += " :action ";
        out += ex.action.to_string();
        out += " :state (";
        for (std::size_t i = 0; i < ex.state.atoms.size(); i++) {
            if (i) out += ' ';
            out += ex.state.atoms[i].to_string();
        }
        out += "))\n";
    }
    return out;
}

std::vector<Example> parse_examples(const std::string &text, const DomainSpec &domain) {
    std::vector<Sexpr> forms = parse_sexprs(text);
    std::vector<Example> out;
    for (const Sexpr &form : forms) {
        if (!form.is_list() || form.size() == 0 || !form.at(0).is_atom() ||
            form.at(0).atom != "example")
            raise(ErrorCode::SYNTAX, form.pos.to_string() + ": expected an (example ...) record");
        Example ex;
        bool have_action = false;
        for (std::size_t i = 1; i < form.size(); i += 2) {
            if (i + 1 >= form.size() || !form.at(i).is_atom())
                raise(ErrorCode::SYNTAX,
                      form.at(i).pos.to_string() + ": expected :key value pairs");
            const std::string &key = form.at(i).atom;
            const Sexpr &val = form.at(i + 1);
            if (key == ":value") {
                ex.value = std::strtod(val.atom.c_str(), nullptr);
            } else if (key == ":action") {
                if (!val.is_list() || val.size() < 1 || !val.at(0).is_atom())
                    raise(ErrorCode::SYNTAX, val.pos.to_string() + ": expected (B c...)");
                ex.action.symbol = Symbol(val.at(0).atom);
                if (!domain.find_stoch(ex.action.symbol))
                    raise(ErrorCode::UNKNOWN_SYMBOL,
                          val.pos.to_string() + ": unknown stochastic action '" +
                              ex.action.symbol.str() + "'");
                for (std::size_t j = 1; j < val.size(); j++)
                    ex.action.args.push_back(Symbol(val.at(j).atom));
                have_action = true;
            } else if (key == ":state") {
                if (!val.is_list())
                    raise(ErrorCode::SYNTAX, val.pos.to_string() + ": :state needs a list");
                for (std::size_t j = 0; j < val.size(); j++) {
                    const Sexpr &atom = val.at(j);
                    if (!atom.is_list() || atom.size() < 1 || !atom.at(0).is_atom())
                        raise(ErrorCode::SYNTAX,
                              atom.pos.to_string() + ": expected a ground atom (F c...)");
                    GroundAtom g;
                    g.pred = Symbol(atom.at(0).atom);
                    const PredSig *sig = domain.find_fluent(g.pred);
                    if (!sig)
                        raise(ErrorCode::UNKNOWN_SYMBOL, atom.pos.to_string() +
                                                             ": unknown fluent '" +
                                                             g.pred.str() + "'");
                    if (static_cast<int>(atom.size()) - 1 != sig->arity)
                        raise(ErrorCode::ARITY,
                              atom.pos.to_string() + ": arity mismatch for '" +
                                  g.pred.str() + "'");
                    for (std::size_t k = 1; k < atom.size(); k++)
                        g.args.push_back(Symbol(atom.at(k).atom));
                    ex.state.atoms.push_back(std::move(g));
                }
                std::sort(ex.state.atoms.begin(), ex.state.atoms.end());
            } else {
                raise(ErrorCode::SYNTAX,
                      form.at(i).pos.to_string() + ": unknown example field '" + key + "'");
            }
        }
        if (!have_action)
            raise(ErrorCode::SYNTAX, form.pos.to_string() + ": example record lacks :action");
        out.push_back(std::move(ex));
    }
    return out;
}

}

#ifndef GPI_GROUND_HPP
#define GPI_GROUND_HPP

#include "gpi/domain.hpp"
#include "gpi/fol.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace gpi {

// Closed-world relational state: the sorted set of true ground fluent atoms.
struct State {
    std::vector<GroundAtom> atoms;  // kept sorted and unique

    bool contains(const GroundAtom &a) const;
    bool operator==(const State &o) const { return atoms == o.atoms; }
    bool operator<(const State &o) const { return atoms < o.atoms; }
    std::string to_string() const;
};

struct GroundAction {
    Symbol symbol;
    std::vector<Symbol> args;

    bool operator==(const GroundAction &o) const;
    bool operator<(const GroundAction &o) const;  // by symbol string, then arg strings
    std::string to_string() const;
};

using ObjectBinding = std::map<Symbol, Symbol>;  // variable -> object

/*
  A domain grounded over an instance's objects: the object universe, the
  static database, Tarskian evaluation, successor computation, and the
  reachable state space (breadth-first from the seed, levels sorted by
  canonical state order).
*/
class Instance {
public:
    static constexpr std::size_t STATE_CAP = 1000000;

    Instance(const DomainSpec &domain, const InstanceSpec &spec);

    const DomainSpec &domain() const { return *domain_; }
    const std::vector<Symbol> &objects() const { return objects_; }
    bool static_true(const GroundAtom &a) const;

    State seed_state() const { return seed_; }

    bool holds(const State &e, const Formula &f, const ObjectBinding &binding = {}) const;

    // All bindings of vars (in the given order) making f true, enumerated in
    // lexicographic object order.
    std::vector<std::vector<Symbol>> witnesses(const State &e, const Formula &f,
                                               const std::vector<Symbol> &vars) const;

    bool applicable(const State &e, const GroundAction &a) const;
    State transition(const State &e, const GroundAction &a) const;

    // Deterministic ground actions in canonical order (symbol, then args).
    const std::vector<GroundAction> &ground_det_actions() const { return det_actions_; }
    const std::vector<GroundAction> &ground_stoch_actions() const { return stoch_actions_; }

    // Reachable states under all deterministic actions. Computed on first use.
    const std::vector<State> &states() const;
    int state_index(const State &e) const;  // -1 when unreachable

    double case_value(const State &e, const CaseStatement &cs) const;  // exactly-one guard
    std::vector<Diagnostic> check_partition(const CaseStatement &cs, const std::string &where) const;

    // Count of formula evaluations done so far (model-checking effort).
    std::int64_t eval_count() const { return eval_count_; }

private:
    struct Env;
    bool eval(const State &e, const Formula &f, Env &env) const;
    const Formula &resolved_ssa(Symbol fluent, const GroundAction &a) const;
    void enumerate() const;

    const DomainSpec *domain_;
    std::vector<Symbol> objects_;
    std::vector<GroundAtom> statics_;  // sorted
    State seed_;
    std::vector<GroundAction> det_actions_;
    std::vector<GroundAction> stoch_actions_;

    mutable std::vector<State> states_;
    mutable std::map<State, int> state_index_;
    mutable bool enumerated_ = false;
    mutable std::map<std::pair<Symbol, GroundAction>, Formula> ssa_cache_;
    mutable std::int64_t eval_count_ = 0;
};

}

#endif

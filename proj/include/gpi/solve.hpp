#ifndef GPI_SOLVE_HPP
#define GPI_SOLVE_HPP

#include "gpi/ground.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gpi {

struct Transition {
    int succ = -1;
    double prob = 0.0;
};

struct StochOutcome {
    GroundAction action;                  // stochastic action
    std::vector<Transition> transitions;  // merged over choices, sums to 1
};

/*
  Explicit MDP over the reachable states of an instance: per-state reward and
  the applicable stochastic actions with their successor distributions.
*/
struct GroundMDP {
    const Instance *instance = nullptr;
    std::vector<double> reward;                          // by state index
    std::vector<std::vector<StochOutcome>> actions;      // by state index

    static GroundMDP build(const Instance &inst);
};

struct ValueTable {
    std::vector<double> value;    // optimal expected discounted value
    std::vector<double> snapped;  // values clustered within snap_eps
    std::vector<double> ladder;   // distinct snapped values, descending
    int iterations = 0;
};

ValueTable value_iteration(const GroundMDP &mdp, double beta = 0.95,
                           double tol = 1e-9, double snap_eps = 1e-6);

// Greedy optimal action; ties broken by lexicographic ground-action order.
GroundAction greedy_action(const GroundMDP &mdp, const ValueTable &vt, double beta, int state);

double q_value(const GroundMDP &mdp, const ValueTable &vt, double beta, int state,
               const StochOutcome &outcome);

struct Example {
    double value = 0.0;     // snapped optimal value of the state
    GroundAction action;    // greedy optimal action
    State state;
};

enum class ExampleKind { P, T };

/*
  Kind P: one example per reachable state. Kind T: greedy trajectories from
  the given starts (state indices; nullptr = all states): the start state is
  always recorded, the walk stops before recording a repeated state, a
  repeated snapped value, or any goal-guard state after the start. Duplicate
  states across trajectories are kept once (first occurrence). Stochastic
  choices are walked through their highest-probability outcome.
*/
std::vector<Example> make_examples(const GroundMDP &mdp, const ValueTable &vt, double beta,
                                   ExampleKind kind, const std::vector<int> *starts = nullptr);

// A state satisfies the goal guard when some reward branch with the maximal
// reward value is true; for the bundled fixtures this is the first branch.
bool goal_guard(const Instance &inst, const State &e);

std::string print_examples(const std::vector<Example> &examples);
std::vector<Example> parse_examples(const std::string &text, const DomainSpec &domain);

}

#endif

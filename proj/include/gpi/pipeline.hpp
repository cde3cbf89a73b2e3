#ifndef GPI_PIPELINE_HPP
#define GPI_PIPELINE_HPP

#include "gpi/learn.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gpi {

struct PolicyDecision {
    enum class Status { ACTION, UNCOVERED_FAILURE_LEAF, UNCOVERED_NO_BINDER };

    Status status = Status::UNCOVERED_NO_BINDER;
    GroundAction action;  // valid when status == ACTION
    int leaf = -1;        // tree node reached
    int binder = -1;      // hypothesis that produced the action (-1 for zero-ary)
};

/*
  Routes a state down the tree by closed-formula truth and extracts an action
  at the reached leaf: the first witness of the first binder that has one
  (zero-ary actions need no witness, only a true precondition).
*/
class PolicyEvaluator {
public:
    PolicyEvaluator(const DecisionTree &tree, const HypothesisSpace &space, const Instance &inst);

    PolicyDecision decide(const State &e);
    std::int64_t route_checks() const { return route_checks_; }

private:
    bool closed_holds(const State &e, int hyp);

    const DecisionTree *tree_;
    const HypothesisSpace *space_;
    const Instance *instance_;
    std::map<std::pair<int, int>, bool> route_memo_;  // (state index, hyp) when indexed
    std::int64_t route_checks_ = 0;
};

struct CoverageReport {
    std::string instance;
    int total = 0;
    int optimal = 0;
    int uncovered = 0;
    double optimal_rate = 0.0;
    double uncovered_rate = 0.0;
    int scope = 0;             // consecutive top training-value levels fully optimal
    bool scope_infinite = false;  // every test state received an optimal action

    std::string to_string() const;
};

/*
  Evaluates the tree on every reachable state of a test instance against that
  instance's own optimal values: a decision is optimal when its Q-value is
  within q_tol of the state's value. The scope counts down the distinct
  training values (descending) as long as every test state within value_eps of
  the level received an optimal decision.
*/
CoverageReport evaluate(const DecisionTree &tree, const HypothesisSpace &space,
                        const Instance &test, const std::vector<double> &training_ladder,
                        double beta = 0.95, double q_tol = 1e-6, double value_eps = 1e-6,
                        const std::string &name = "");

struct SimulationResult {
    std::vector<int> states;            // visited state indices
    std::vector<GroundAction> actions;  // chosen per step
    double discounted_return = 0.0;
    bool uncovered_halt = false;        // rollout stopped at an undecidable state
};

/*
  Rolls the policy out for `horizon` steps from `start`, sampling stochastic
  choices with a counter-based generator so a given seed always reproduces the
  same trajectory.
*/
SimulationResult simulate(const DecisionTree &tree, const HypothesisSpace &space,
                          const Instance &inst, const GroundMDP &mdp, int start, int horizon,
                          std::uint64_t seed, double beta = 0.95);

struct PipelineConfig {
    std::string domain_path;
    std::string train_instance;
    std::vector<std::string> test_instances;
    ExampleKind kind = ExampleKind::P;
    LearnerConfig learner;
    double beta = 0.95;
    double tol = 1e-9;
    std::string out_dir;
};

struct PipelineResult {
    std::vector<Example> examples;
    DecisionTree tree;
    BuildReport build;
    std::vector<CoverageReport> coverage;
    std::string summary;
};

// Train, learn, evaluate, and write examples/hypotheses/tree/report files.
PipelineResult run_pipeline(const PipelineConfig &cfg);

}

#endif

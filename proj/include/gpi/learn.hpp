#ifndef GPI_LEARN_HPP
#define GPI_LEARN_HPP

#include "gpi/ground.hpp"
#include "gpi/regress.hpp"
#include "gpi/solve.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gpi {

enum class Selector { PAPER, INFOGAIN };
enum class Deepening { EAGER, LAZY };

struct LearnerConfig {
    int max_n = 3;
    double epsilon = 1e-6;       // value spread allowed within a pure node
    Selector selector = Selector::PAPER;
    Deepening deepening = Deepening::EAGER;
    bool prune = true;
};

struct TreeNode {
    enum class Kind { SPLIT, SUCCESS, FAILURE };

    Kind kind = Kind::FAILURE;
    // SPLIT
    int hyp = -1;
    int pos = -1;
    int neg = -1;
    // SUCCESS
    Symbol action;
    double value = 0.0;
    std::vector<int> binders;  // hypothesis ids, best first
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // preorder; root at 0
    int root = 0;

    int count(TreeNode::Kind kind) const;
};

struct BuildReport {
    int examples = 0;
    int hypotheses_generated = 0;  // total size of the hypothesis space
    int hypotheses_pruned = 0;
    std::int64_t model_checks = 0;
    int max_depth_reached = 0;
    int split_nodes = 0;
    int success_leaves = 0;
    int failure_leaves = 0;

    std::string to_string() const;
};

/*
  Model-checking cache for example/hypothesis satisfaction. An example
  satisfies a depth-0 hypothesis when its closed formula holds in the example
  state; it satisfies a deeper one when the action symbols and arity match
  and the open body holds under the example's action arguments.
*/
class SatisfactionTable {
public:
    SatisfactionTable(const std::vector<Example> &examples, const Instance &inst);

    bool satisfies(int example, const HypothesisSpace &space, int hyp);
    std::int64_t checks() const { return checks_; }

private:
    const std::vector<Example> *examples_;
    const Instance *instance_;
    std::vector<std::vector<signed char>> memo_;  // [example][hyp], -1 unknown
    std::int64_t checks_ = 0;
};

/*
  Top-down decision-tree induction over the hypothesis space. With eager
  deepening the space is expanded to max_n at the first impure node (each new
  layer pruned against that node's examples when pruning is on) before any
  split is selected; with lazy deepening expansion happens per branch whenever
  no proper splitter exists. Pure nodes whose action is parameterized deepen
  the same way until a binder is available.
*/
DecisionTree build_tree(const std::vector<Example> &examples, const LearnerConfig &cfg,
                        HypothesisSpace &space, const Instance &inst, BuildReport *report = nullptr);

std::string print_tree(const DecisionTree &tree, const DomainSpec &domain);
DecisionTree parse_tree(const std::string &text, const DomainSpec &domain);

}

#endif

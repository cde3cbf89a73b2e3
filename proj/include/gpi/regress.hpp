#ifndef GPI_REGRESS_HPP
#define GPI_REGRESS_HPP

#include "gpi/domain.hpp"
#include "gpi/fol.hpp"

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace gpi {

/*
  One-step regression of a state formula through the deterministic action
  term alpha: fluent atoms are replaced by the corresponding successor-state
  axiom instantiated at alpha (then simplified); statics, equalities and
  constants pass through.
*/
Formula repr(const Formula &f, const ActionTerm &alpha, const DomainSpec &domain);

/*
  Open regression of phi through deterministic action A with fresh parameters
  x1..xk: simplify(Poss_A(x) and repr(phi, A(x))), bound variables
  standardized apart.
*/
Formula regress_open(const Formula &phi, const DetActionDecl &action,
                     const DomainSpec &domain, std::vector<Symbol> *params_out = nullptr);

struct Hypothesis {
    int id = -1;
    int depth = 0;
    Symbol det_action;             // invalid at depth 0
    Symbol stoch_action;           // invalid at depth 0
    std::vector<Symbol> params;    // fresh x1..xk of the last regression
    Formula body;                  // open
    Formula closed;                // existential closure of body, simplified
    int parent = -1;
    double seed_value = 0.0;
    std::string key;               // canonical form of closed
};

/*
  The hypothesis language: layer 0 holds the reward-case guards; layer i+1
  holds open regressions of layer-i formulae through every deterministic
  choice of every stochastic action. Within a layer, hypotheses with the same
  stochastic annotation and canonical closed form are generated once (first
  kept); regressions that simplify to false are dropped.
*/
class HypothesisSpace {
public:
    explicit HypothesisSpace(const DomainSpec &domain);

    // Rebuilds a space from previously printed hypothesis records.
    HypothesisSpace(const DomainSpec &domain, std::vector<Hypothesis> hyps);

    const DomainSpec &domain() const { return *domain_; }
    const Hypothesis &hyp(int id) const { return hyps_.at(id); }
    int size() const { return static_cast<int>(hyps_.size()); }
    int depth() const { return static_cast<int>(layers_.size()) - 1; }
    const std::vector<int> &layer(int d) const { return layers_.at(d); }

    /*
      Regresses `sources` (default: the whole layer depth-1) into layer
      `depth`, which is at most depth()+1. Returns the resulting ids; a
      regression whose annotated canonical form already exists contributes
      the existing id rather than a duplicate.
    */
    std::vector<int> expand_layer(int depth, const std::vector<int> *sources = nullptr);

    // Expands unpruned layers up to depth n.
    void generate(int n);

private:
    int add_hypothesis(Hypothesis h);

    const DomainSpec *domain_;
    std::vector<Hypothesis> hyps_;
    std::vector<std::vector<int>> layers_;
    std::map<std::tuple<int, Symbol, std::string>, int> seen_;  // (depth, stoch, key) -> id
};

std::string print_hypothesis(const Hypothesis &h);
std::string print_hypotheses(const HypothesisSpace &space);
std::vector<Hypothesis> parse_hypotheses(const std::string &text, const DomainSpec &domain);

}

#endif

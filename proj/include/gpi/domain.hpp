#ifndef GPI_DOMAIN_HPP
#define GPI_DOMAIN_HPP

#include "gpi/fol.hpp"
#include "gpi/symbol.hpp"

#include <string>
#include <vector>

namespace gpi {

struct CaseBranch {
    Formula guard;
    double value = 0.0;
};

struct CaseStatement {
    std::vector<CaseBranch> branches;
};

struct PredSig {
    Symbol name;
    int arity = 0;
};

struct DetActionDecl {
    Symbol name;
    std::vector<Symbol> params;
    Formula poss;
};

struct SSADecl {
    Symbol fluent;
    std::vector<Symbol> params;
    Formula body;  // free vars within params, plus the action variable
};

struct StochActionDecl {
    Symbol name;
    std::vector<Symbol> params;
    std::vector<Symbol> choices;          // deterministic action names; args are the params
    std::vector<CaseStatement> probs;     // parallel to choices
};

struct DomainSpec {
    std::string name;
    std::vector<Symbol> constants;
    std::vector<PredSig> statics;
    std::vector<PredSig> fluents;
    std::vector<DetActionDecl> det_actions;
    std::vector<SSADecl> ssas;
    std::vector<StochActionDecl> stoch_actions;
    CaseStatement reward;
    bool has_noop = false;

    const DetActionDecl *find_det(Symbol name) const;
    const SSADecl *find_ssa(Symbol fluent) const;
    const StochActionDecl *find_stoch(Symbol name) const;
    const PredSig *find_static(Symbol name) const;
    const PredSig *find_fluent(Symbol name) const;
    bool is_constant(Symbol name) const;
};

struct GroundAtom {
    Symbol pred;
    std::vector<Symbol> args;

    bool operator==(const GroundAtom &o) const;
    bool operator!=(const GroundAtom &o) const { return !(*this == o); }
    bool operator<(const GroundAtom &o) const;

    std::string to_string() const;
};

struct InstanceSpec {
    std::vector<Symbol> objects;       // as declared (domain constants not repeated)
    std::vector<GroundAtom> statics;
    std::vector<GroundAtom> seed;
};

struct Diagnostic {
    std::string code;     // e.g. "E_FREE_VAR", "W_PROB_MASS"
    std::string where;    // declaration the problem was found in
    std::string message;
};

DomainSpec parse_domain(const std::string &text);
InstanceSpec parse_instance(const std::string &text, const DomainSpec &domain);

// Structural checks beyond what parsing enforces; empty result = clean.
std::vector<Diagnostic> validate(const DomainSpec &spec);

std::string print_domain(const DomainSpec &spec);
std::string print_instance(const InstanceSpec &inst);

/*
  Parses a formula in the context of a domain's predicates and constants.
  Identifiers in term position denote constants when declared (domain
  constants plus extra_constants), variables otherwise.
*/
Formula parse_formula_text(const std::string &text, const DomainSpec &domain,
                           const std::vector<Symbol> &extra_constants = {});

}

#endif

#include "gpi/pipeline.hpp"

#include "gpi/errors.hpp"
#include "gpi/regress.hpp"
#include "gpi/sexpr.hpp"
#include "gpi/solve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

namespace gpi {

namespace {

std::string fmt_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

PolicyEvaluator::PolicyEvaluator(const DecisionTree &tree, const HypothesisSpace &space,
                                 const Instance &inst)
    : tree_(&tree), space_(&space), instance_(&inst) {}

bool PolicyEvaluator::closed_holds(const State &e, int hyp) {
    int idx = instance_->state_index(e);
    if (idx >= 0) {
        auto it = route_memo_.find({idx, hyp});
        if (it != route_memo_.end()) return it->second;
    }
    bool result = instance_->holds(e, space_->hyp(hyp).closed);
    ++route_checks_;
    if (idx >= 0) route_memo_[{idx, hyp}] = result;
    return result;
}

PolicyDecision PolicyEvaluator::decide(const State &e) {
    int at = tree_->root;
    while (true) {
        const TreeNode &node = tree_->nodes.at(static_cast<size_t>(at));
        if (node.kind == TreeNode::Kind::SPLIT) {
            at = closed_holds(e, node.hyp) ? node.pos : node.neg;
            continue;
        }
        if (node.kind == TreeNode::Kind::FAILURE) {
            PolicyDecision d;
            d.status = PolicyDecision::Status::UNCOVERED_FAILURE_LEAF;
            d.leaf = at;
            return d;
        }
        // Success leaf: bind the action parameters with the first binder that
        // has a witness in this state.
        const StochActionDecl *decl = instance_->domain().find_stoch(node.action);
        bool zero_ary = decl == nullptr || decl->params.empty();
        for (int hyp_id : node.binders) {
            const Hypothesis &h = space_->hyp(hyp_id);
            std::vector<std::vector<Symbol>> tuples =
                instance_->witnesses(e, h.body, h.params);
            if (tuples.empty()) continue;
            PolicyDecision d;
            d.status = PolicyDecision::Status::ACTION;
            d.action = GroundAction{node.action, tuples.front()};
            d.leaf = at;
            d.binder = hyp_id;
            return d;
        }
        if (zero_ary) {
            PolicyDecision d;
            d.status = PolicyDecision::Status::ACTION;
            d.action = GroundAction{node.action, {}};
            d.leaf = at;
            return d;
        }
        PolicyDecision d;
        d.status = PolicyDecision::Status::UNCOVERED_NO_BINDER;
        d.leaf = at;
        return d;
    }
}

std::string CoverageReport::to_string() const {
    std::ostringstream out;
    out << "(coverage";
    if (!instance.empty()) out << " :instance " << instance;
    out << " :states " << total
        << " :optimal " << optimal
        << " :uncovered " << uncovered
        << " :optimal-rate " << fmt_value(optimal_rate)
        << " :uncovered-rate " << fmt_value(uncovered_rate)
        << " :scope ";
    if (scope_infinite)
        out << "inf";
    else
        out << scope;
    out << ")";
    return out.str();
}

CoverageReport evaluate(const DecisionTree &tree, const HypothesisSpace &space,
                        const Instance &test, const std::vector<double> &training_ladder,
                        double beta, double q_tol, double value_eps,
                        const std::string &name) {
    GroundMDP mdp = GroundMDP::build(test);
    ValueTable vt = value_iteration(mdp, beta);
    PolicyEvaluator policy(tree, space, test);

    const std::vector<State> &states = test.states();
    std::vector<char> is_optimal(states.size(), 0);
    CoverageReport report;
    report.instance = name;
    report.total = static_cast<int>(states.size());

    for (size_t i = 0; i < states.size(); ++i) {
        PolicyDecision d = policy.decide(states[i]);
        if (d.status != PolicyDecision::Status::ACTION) {
            ++report.uncovered;
            continue;
        }
        const std::vector<StochOutcome> &outcomes = mdp.actions[i];
        double best = 0.0;
        double chosen = 0.0;
        bool found = false;
        bool have_best = false;
        for (const StochOutcome &o : outcomes) {
            double q = q_value(mdp, vt, beta, static_cast<int>(i), o);
            if (!have_best || q > best) { best = q; have_best = true; }
            if (o.action == d.action) {
                chosen = q;
                found = true;
            }
        }
        if (found && chosen >= best - q_tol) {
            is_optimal[i] = 1;
            ++report.optimal;
        }
    }

    if (report.total > 0) {
        report.optimal_rate =
            static_cast<double>(report.optimal) / static_cast<double>(report.total);
        report.uncovered_rate =
            static_cast<double>(report.uncovered) / static_cast<double>(report.total);
    }

    // Scope: walk the training values from the top; a level passes when every
    // test state whose snapped value matches it received an optimal action.
    for (double v : training_ladder) {
        bool level_ok = true;
        for (size_t i = 0; i < states.size(); ++i) {
            if (std::abs(vt.snapped[i] - v) > value_eps) continue;
            if (!is_optimal[i]) { level_ok = false; break; }
        }
        if (!level_ok) break;
        ++report.scope;
    }
    report.scope_infinite =
        report.total > 0 && report.optimal == report.total;
    return report;
}

namespace {

double unit_uniform(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

} // namespace

SimulationResult simulate(const DecisionTree &tree, const HypothesisSpace &space,
                          const Instance &inst, const GroundMDP &mdp, int start, int horizon,
                          std::uint64_t seed, double beta) {
    const std::vector<State> &states = inst.states();
    if (start < 0 || static_cast<size_t>(start) >= states.size())
        raise(ErrorCode::UNBOUND, "simulation start index out of range");

    PolicyEvaluator policy(tree, space, inst);
    SimulationResult result;
    int cur = start;
    double discount = 1.0;
    for (int t = 0; t <= horizon; ++t) {
        result.states.push_back(cur);
        result.discounted_return += discount * mdp.reward[static_cast<size_t>(cur)];
        discount *= beta;
        if (t == horizon) break;

        PolicyDecision d = policy.decide(states[static_cast<size_t>(cur)]);
        if (d.status != PolicyDecision::Status::ACTION) {
            result.uncovered_halt = true;
            break;
        }
        const StochOutcome *outcome = nullptr;
        for (const StochOutcome &o : mdp.actions[static_cast<size_t>(cur)])
            if (o.action == d.action) { outcome = &o; break; }
        if (outcome == nullptr)
            raise(ErrorCode::NOT_APPLICABLE,
                  "policy chose inapplicable action " + d.action.to_string());
        result.actions.push_back(d.action);

        double u = unit_uniform(seed, static_cast<std::uint64_t>(t));
        double cum = 0.0;
        int next = outcome->transitions.back().succ;
        for (const Transition &tr : outcome->transitions) {
            cum += tr.prob;
            if (u < cum) { next = tr.succ; break; }
        }
        cur = next;
    }
    return result;
}

namespace {

ErrorCode code_from_name(const std::string &name) {
    static const std::map<std::string, ErrorCode> table = {
        {"E_SYNTAX", ErrorCode::SYNTAX},
        {"E_UNKNOWN_SYMBOL", ErrorCode::UNKNOWN_SYMBOL},
        {"E_ARITY", ErrorCode::ARITY},
        {"E_DUPLICATE", ErrorCode::DUPLICATE},
        {"E_SORT", ErrorCode::SORT},
        {"E_FREE_VAR", ErrorCode::FREE_VAR},
        {"E_NO_SSA", ErrorCode::NO_SSA},
        {"E_UNBOUND", ErrorCode::UNBOUND},
        {"E_NOT_APPLICABLE", ErrorCode::NOT_APPLICABLE},
        {"E_EXPLOSION", ErrorCode::EXPLOSION},
        {"E_PROB_MASS", ErrorCode::PROB_MASS},
        {"E_PARTITION", ErrorCode::PARTITION},
        {"E_NO_ACTION", ErrorCode::NO_ACTION},
        {"E_EMPTY_EXAMPLES", ErrorCode::EMPTY_EXAMPLES},
        {"E_NO_BINDER", ErrorCode::NO_BINDER},
        {"E_UNCOVERED_STATE", ErrorCode::UNCOVERED_STATE},
        {"E_IO", ErrorCode::IO},
    };
    auto it = table.find(name);
    if (it != table.end()) return it->second;
    return ErrorCode::SORT;  // any unrecognized hard diagnostic is a model fault
}

std::string instance_label(const std::string &path) {
    return std::filesystem::path(path).stem().string();
}

} // namespace

PipelineResult run_pipeline(const PipelineConfig &cfg) {
    DomainSpec domain = parse_domain(read_file(cfg.domain_path));
    std::vector<Diagnostic> diags = validate(domain);
    std::string warnings;
    for (const Diagnostic &d : diags) {
        if (d.code.rfind("E_", 0) == 0)
            raise(code_from_name(d.code), d.where + ": " + d.message);
        warnings += "; " + d.code + " " + d.where + ": " + d.message;
    }

    InstanceSpec train_spec = parse_instance(read_file(cfg.train_instance), domain);
    Instance train(domain, train_spec);
    GroundMDP train_mdp = GroundMDP::build(train);
    ValueTable vt = value_iteration(train_mdp, cfg.beta, cfg.tol);

    PipelineResult result;
    result.examples = make_examples(train_mdp, vt, cfg.beta, cfg.kind);

    HypothesisSpace space(domain);
    result.tree = build_tree(result.examples, cfg.learner, space, train, &result.build);

    // Keep the parsed specs alive while their instances are in use.
    std::vector<InstanceSpec> test_specs;
    test_specs.reserve(cfg.test_instances.size());
    std::vector<Instance> tests;
    tests.reserve(cfg.test_instances.size());
    for (const std::string &path : cfg.test_instances)
        test_specs.push_back(parse_instance(read_file(path), domain));
    for (size_t i = 0; i < cfg.test_instances.size(); ++i) {
        tests.emplace_back(domain, test_specs[i]);
        result.coverage.push_back(evaluate(result.tree, space, tests[i], vt.ladder,
                                           cfg.beta, 1e-6, 1e-6,
                                           instance_label(cfg.test_instances[i])));
    }

    std::ostringstream summary;
    summary << "domain " << domain.name << ", train "
            << instance_label(cfg.train_instance) << " (" << train.states().size()
            << " states, " << vt.iterations << " sweeps, "
            << (cfg.kind == ExampleKind::P ? "P" : "T") << " examples)\n";
    summary << result.build.to_string() << "\n";
    for (const CoverageReport &cov : result.coverage)
        summary << cov.to_string() << "\n";
    if (!warnings.empty()) summary << "warnings" << warnings << "\n";
    result.summary = summary.str();

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::filesystem::path out(cfg.out_dir);
        write_file((out / "examples.rec").string(), print_examples(result.examples));
        write_file((out / "hypotheses.rec").string(), print_hypotheses(space));
        write_file((out / "tree.rec").string(), print_tree(result.tree, domain));
        write_file((out / "report.rec").string(), result.summary);
    }
    return result;
}

} // namespace gpi

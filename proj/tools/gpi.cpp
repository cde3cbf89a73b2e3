#include "gpi/domain.hpp"
#include "gpi/errors.hpp"
#include "gpi/ground.hpp"
#include "gpi/learn.hpp"
#include "gpi/pipeline.hpp"
#include "gpi/regress.hpp"
#include "gpi/sexpr.hpp"
#include "gpi/solve.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace gpi;

struct CommonOpts {
    std::string domain_path;
    std::string instance_path;
    double beta = 0.95;
    double tol = 1e-9;
};

DomainSpec load_domain(const std::string &path) {
    DomainSpec domain = parse_domain(read_file(path));
    for (const Diagnostic &d : validate(domain)) {
        if (d.code.rfind("E_", 0) == 0)
            raise(ErrorCode::SORT, d.code + " " + d.where + ": " + d.message);
        std::cerr << d.code << " " << d.where << ": " << d.message << "\n";
    }
    return domain;
}

ExampleKind parse_kind(const std::string &kind) {
    if (kind == "P" || kind == "p") return ExampleKind::P;
    if (kind == "T" || kind == "t") return ExampleKind::T;
    raise(ErrorCode::SYNTAX, "unknown example kind " + kind + " (use P or T)");
}

LearnerConfig make_learner(int max_n, const std::string &selector,
                           const std::string &deepen, bool no_prune) {
    LearnerConfig cfg;
    cfg.max_n = max_n;
    if (selector == "paper")
        cfg.selector = Selector::PAPER;
    else if (selector == "infogain")
        cfg.selector = Selector::INFOGAIN;
    else
        raise(ErrorCode::SYNTAX, "unknown selector " + selector);
    if (deepen == "eager")
        cfg.deepening = Deepening::EAGER;
    else if (deepen == "lazy")
        cfg.deepening = Deepening::LAZY;
    else
        raise(ErrorCode::SYNTAX, "unknown deepening mode " + deepen);
    cfg.prune = !no_prune;
    return cfg;
}

// Resolve an instance file from the domain file and an object count: strip
// trailing -suffixes from the domain stem until some "<stem>-<n>.inst" exists
// next to it (lg-ex.rmdp + 2 -> lg-2.inst when lg-ex-2.inst is absent).
std::string resolve_instance(const std::string &domain_path, int size) {
    namespace fs = std::filesystem;
    fs::path dir = fs::path(domain_path).parent_path();
    std::string stem = fs::path(domain_path).stem().string();
    while (true) {
        fs::path candidate = dir / (stem + "-" + std::to_string(size) + ".inst");
        if (fs::exists(candidate)) return candidate.string();
        size_t dash = stem.rfind('-');
        if (dash == std::string::npos) break;
        stem.resize(dash);
    }
    raise(ErrorCode::IO, "no instance of size " + std::to_string(size) +
                             " next to " + domain_path);
}

int cmd_parse(const CommonOpts &opts) {
    DomainSpec domain = load_domain(opts.domain_path);
    std::cout << print_domain(domain);
    if (!opts.instance_path.empty()) {
        InstanceSpec spec = parse_instance(read_file(opts.instance_path), domain);
        std::cout << print_instance(spec);
    }
    return 0;
}

int cmd_enumerate(const CommonOpts &opts) {
    DomainSpec domain = load_domain(opts.domain_path);
    InstanceSpec spec = parse_instance(read_file(opts.instance_path), domain);
    Instance inst(domain, spec);
    for (const State &e : inst.states()) std::cout << e.to_string() << "\n";
    std::cout << "; " << inst.states().size() << " states\n";
    return 0;
}

int cmd_solve(const CommonOpts &opts, const std::string &kind,
              const std::string &examples_out) {
    DomainSpec domain = load_domain(opts.domain_path);
    InstanceSpec spec = parse_instance(read_file(opts.instance_path), domain);
    Instance inst(domain, spec);
    GroundMDP mdp = GroundMDP::build(inst);
    ValueTable vt = value_iteration(mdp, opts.beta, opts.tol);

    std::cout << "; " << inst.states().size() << " states, " << vt.iterations
              << " sweeps\n";
    std::cout << std::setprecision(12);
    for (double v : vt.ladder) {
        int count = 0;
        for (double s : vt.snapped)
            if (s == v) ++count;
        std::cout << "(level :value " << v << " :states " << count << ")\n";
    }
    std::vector<Example> examples =
        make_examples(mdp, vt, opts.beta, parse_kind(kind));
    std::cout << "; " << examples.size() << " examples\n";
    if (!examples_out.empty())
        write_file(examples_out, print_examples(examples));
    return 0;
}

int cmd_hypotheses(const CommonOpts &opts, int max_n, const std::string &out) {
    DomainSpec domain = load_domain(opts.domain_path);
    HypothesisSpace space(domain);
    space.generate(max_n);
    std::string text = print_hypotheses(space);
    if (out.empty())
        std::cout << text;
    else
        write_file(out, text);
    std::cout << "; " << space.size() << " hypotheses to depth " << space.depth()
              << "\n";
    return 0;
}

int cmd_learn(const CommonOpts &opts, const std::string &kind,
              const std::string &examples_path, const LearnerConfig &learner,
              const std::string &out_dir) {
    DomainSpec domain = load_domain(opts.domain_path);
    InstanceSpec spec = parse_instance(read_file(opts.instance_path), domain);
    Instance inst(domain, spec);

    std::vector<Example> examples;
    if (!examples_path.empty()) {
        examples = parse_examples(read_file(examples_path), domain);
    } else {
        GroundMDP mdp = GroundMDP::build(inst);
        ValueTable vt = value_iteration(mdp, opts.beta, opts.tol);
        examples = make_examples(mdp, vt, opts.beta, parse_kind(kind));
    }

    HypothesisSpace space(domain);
    BuildReport report;
    DecisionTree tree = build_tree(examples, learner, space, inst, &report);
    std::cout << report.to_string() << "\n";
    std::cout << print_tree(tree, domain);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::filesystem::path out(out_dir);
        write_file((out / "examples.rec").string(), print_examples(examples));
        write_file((out / "hypotheses.rec").string(), print_hypotheses(space));
        write_file((out / "tree.rec").string(), print_tree(tree, domain));
        write_file((out / "report.rec").string(), report.to_string() + "\n");
    }
    return 0;
}

int cmd_eval(const CommonOpts &opts, const std::string &tree_path,
             const std::string &hyp_path, const std::vector<double> &ladder) {
    DomainSpec domain = load_domain(opts.domain_path);
    InstanceSpec spec = parse_instance(read_file(opts.instance_path), domain);
    Instance inst(domain, spec);
    HypothesisSpace space(domain, parse_hypotheses(read_file(hyp_path), domain));
    DecisionTree tree = parse_tree(read_file(tree_path), domain);
    CoverageReport report =
        evaluate(tree, space, inst, ladder, opts.beta, 1e-6, 1e-6,
                 std::filesystem::path(opts.instance_path).stem().string());
    std::cout << report.to_string() << "\n";
    return 0;
}

int cmd_simulate(const CommonOpts &opts, const std::string &tree_path,
                 const std::string &hyp_path, int start, int horizon,
                 std::uint64_t seed) {
    DomainSpec domain = load_domain(opts.domain_path);
    InstanceSpec spec = parse_instance(read_file(opts.instance_path), domain);
    Instance inst(domain, spec);
    HypothesisSpace space(domain, parse_hypotheses(read_file(hyp_path), domain));
    DecisionTree tree = parse_tree(read_file(tree_path), domain);
    GroundMDP mdp = GroundMDP::build(inst);
    SimulationResult result =
        simulate(tree, space, inst, mdp, start, horizon, seed, opts.beta);
    for (size_t t = 0; t < result.states.size(); ++t) {
        std::cout << "(step :t " << t << " :state " << result.states[t];
        if (t < result.actions.size())
            std::cout << " :action " << result.actions[t].to_string();
        std::cout << ")\n";
    }
    std::cout << std::setprecision(12) << "(return :value "
              << result.discounted_return << " :halted "
              << (result.uncovered_halt ? "yes" : "no") << ")\n";
    return 0;
}

int cmd_pipeline(PipelineConfig cfg, int train_size,
                 const std::vector<int> &test_sizes) {
    if (cfg.train_instance.empty()) {
        if (train_size <= 0)
            raise(ErrorCode::IO, "pipeline needs --train-instance or --train-size");
        cfg.train_instance = resolve_instance(cfg.domain_path, train_size);
    }
    for (int size : test_sizes)
        cfg.test_instances.push_back(resolve_instance(cfg.domain_path, size));
    PipelineResult result = run_pipeline(cfg);
    std::cout << result.summary;
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"generalized policy induction over relational MDPs"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string kind = "P";
    std::string examples_path;
    std::string tree_path;
    std::string hyp_path;
    std::string out;
    std::string selector = "paper";
    std::string deepen = "eager";
    bool no_prune = false;
    int max_n = 3;
    int start = 0;
    int horizon = 50;
    std::uint64_t seed = 1;
    std::vector<double> ladder;
    int train_size = 0;
    std::vector<int> test_sizes;
    std::string train_instance;
    std::vector<std::string> test_instances;

    auto add_domain = [&](CLI::App *sub, bool with_instance) {
        sub->add_option("--domain", opts.domain_path, "domain file")->required();
        if (with_instance)
            sub->add_option("--instance", opts.instance_path, "instance file");
    };

    CLI::App *parse_cmd = app.add_subcommand("parse", "parse and echo a domain");
    add_domain(parse_cmd, true);

    CLI::App *enum_cmd = app.add_subcommand("enumerate", "list reachable states");
    add_domain(enum_cmd, true);

    CLI::App *solve_cmd = app.add_subcommand("solve", "value-iterate an instance");
    add_domain(solve_cmd, true);
    solve_cmd->add_option("--beta", opts.beta, "discount factor");
    solve_cmd->add_option("--tol", opts.tol, "convergence tolerance");
    solve_cmd->add_option("--kind", kind, "example kind: P or T");
    solve_cmd->add_option("--examples", examples_path, "write example records here");

    CLI::App *hyp_cmd = app.add_subcommand("hypotheses", "generate the hypothesis space");
    add_domain(hyp_cmd, false);
    hyp_cmd->add_option("--max-n", max_n, "regression depth");
    hyp_cmd->add_option("--out", out, "write hypothesis records here");

    CLI::App *learn_cmd = app.add_subcommand("learn", "induce a decision tree");
    add_domain(learn_cmd, true);
    learn_cmd->add_option("--beta", opts.beta, "discount factor");
    learn_cmd->add_option("--tol", opts.tol, "convergence tolerance");
    learn_cmd->add_option("--kind", kind, "example kind: P or T");
    learn_cmd->add_option("--examples", examples_path, "read example records instead");
    learn_cmd->add_option("--max-n", max_n, "regression depth bound");
    learn_cmd->add_option("--selector", selector, "split scorer: paper or infogain");
    learn_cmd->add_option("--deepen", deepen, "deepening mode: eager or lazy");
    learn_cmd->add_flag("--no-prune", no_prune, "keep unsatisfiable hypotheses");
    learn_cmd->add_option("--out", out, "directory for records");

    CLI::App *eval_cmd = app.add_subcommand("eval", "score a tree on an instance");
    add_domain(eval_cmd, true);
    eval_cmd->add_option("--beta", opts.beta, "discount factor");
    eval_cmd->add_option("--tree", tree_path, "tree record")->required();
    eval_cmd->add_option("--hypotheses", hyp_path, "hypothesis records")->required();
    eval_cmd->add_option("--ladder", ladder, "training values, descending");

    CLI::App *sim_cmd = app.add_subcommand("simulate", "roll a tree policy out");
    add_domain(sim_cmd, true);
    sim_cmd->add_option("--beta", opts.beta, "discount factor");
    sim_cmd->add_option("--tree", tree_path, "tree record")->required();
    sim_cmd->add_option("--hypotheses", hyp_path, "hypothesis records")->required();
    sim_cmd->add_option("--start", start, "start state index");
    sim_cmd->add_option("--horizon", horizon, "steps to roll");
    sim_cmd->add_option("--seed", seed, "trajectory seed");

    CLI::App *pipe_cmd = app.add_subcommand("pipeline", "train, learn, evaluate");
    pipe_cmd->add_option("--domain", opts.domain_path, "domain file")->required();
    pipe_cmd->add_option("--train-instance", train_instance, "training instance file");
    pipe_cmd->add_option("--test-instance", test_instances, "test instance files");
    pipe_cmd->add_option("--train-size", train_size, "resolve training instance by size");
    pipe_cmd->add_option("--test-size", test_sizes, "resolve test instances by size");
    pipe_cmd->add_option("--beta", opts.beta, "discount factor");
    pipe_cmd->add_option("--tol", opts.tol, "convergence tolerance");
    pipe_cmd->add_option("--kind", kind, "example kind: P or T");
    pipe_cmd->add_option("--max-n", max_n, "regression depth bound");
    pipe_cmd->add_option("--selector", selector, "split scorer: paper or infogain");
    pipe_cmd->add_option("--deepen", deepen, "deepening mode: eager or lazy");
    pipe_cmd->add_flag("--no-prune", no_prune, "keep unsatisfiable hypotheses");
    pipe_cmd->add_option("--out", out, "directory for records");

    CLI11_PARSE(app, argc, argv);

    try {
        if (parse_cmd->parsed()) return cmd_parse(opts);
        if (enum_cmd->parsed()) return cmd_enumerate(opts);
        if (solve_cmd->parsed()) return cmd_solve(opts, kind, examples_path);
        if (hyp_cmd->parsed()) return cmd_hypotheses(opts, max_n, out);
        if (learn_cmd->parsed())
            return cmd_learn(opts, kind, examples_path,
                             make_learner(max_n, selector, deepen, no_prune), out);
        if (eval_cmd->parsed()) return cmd_eval(opts, tree_path, hyp_path, ladder);
        if (sim_cmd->parsed())
            return cmd_simulate(opts, tree_path, hyp_path, start, horizon, seed);
        if (pipe_cmd->parsed()) {
            PipelineConfig cfg;
            cfg.domain_path = opts.domain_path;
            cfg.train_instance = train_instance;
            cfg.test_instances = test_instances;
            cfg.kind = parse_kind(kind);
            cfg.learner = make_learner(max_n, selector, deepen, no_prune);
            cfg.beta = opts.beta;
            cfg.tol = opts.tol;
            cfg.out_dir = out;
            return cmd_pipeline(std::move(cfg), train_size, test_sizes);
        }
    } catch (const std::exception &e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}

#include "gpi/learn.hpp"

#include "gpi/errors.hpp"
#include "gpi/sexpr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace gpi {

namespace {

std::string fmt_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

int DecisionTree::count(TreeNode::Kind kind) const {
    int n = 0;
    for (const TreeNode &node : nodes)
        if (node.kind == kind) ++n;
    return n;
}

std::string BuildReport::to_string() const {
    std::ostringstream out;
    out << "(build-report"
        << " :examples " << examples
        << " :hyps-generated " << hypotheses_generated
        << " :hyps-pruned " << hypotheses_pruned
        << " :model-checks " << model_checks
        << " :max-depth " << max_depth_reached
        << " :splits " << split_nodes
        << " :success-leaves " << success_leaves
        << " :failure-leaves " << failure_leaves
        << ")";
    return out.str();
}

SatisfactionTable::SatisfactionTable(const std::vector<Example> &examples,
                                     const Instance &inst)
    : examples_(&examples), instance_(&inst) {
    memo_.resize(examples.size());
}

bool SatisfactionTable::satisfies(int example, const HypothesisSpace &space, int hyp) {
    std::vector<signed char> &row = memo_.at(static_cast<size_t>(example));
    if (static_cast<size_t>(hyp) >= row.size())
        row.resize(space.size(), -1);
    signed char &cell = row.at(static_cast<size_t>(hyp));
    if (cell >= 0) return cell != 0;

    const Example &ex = (*examples_)[static_cast<size_t>(example)];
    const Hypothesis &h = space.hyp(hyp);
    bool result = false;
    if (h.depth == 0) {
        // Depth-0 hypotheses describe the state alone; the action is ignored.
        result = instance_->holds(ex.state, h.closed);
    } else if (ex.action.symbol == h.stoch_action &&
               ex.action.args.size() == h.params.size()) {
        ObjectBinding binding;
        for (size_t i = 0; i < h.params.size(); ++i)
            binding[h.params[i]] = ex.action.args[i];
        result = instance_->holds(ex.state, h.body, binding);
    }
    ++checks_;
    cell = result ? 1 : 0;
    return result;
}

namespace {

// Recursive tree builder. Availability of hypotheses is branch-local so a
// split hypothesis never reappears below itself; the hypothesis space is
// shared and only ever grows.
struct Builder {
    const std::vector<Example> &examples;
    const LearnerConfig &cfg;
    HypothesisSpace &space;
    const Instance &inst;
    SatisfactionTable table;
    DecisionTree tree;
    BuildReport report;
    bool eager_deepened = false;

    Builder(const std::vector<Example> &ex, const LearnerConfig &c,
            HypothesisSpace &sp, const Instance &in)
        : examples(ex), cfg(c), space(sp), inst(in), table(ex, in) {}

    bool sat(int e, int h) { return table.satisfies(e, space, h); }

    bool pure(const std::vector<int> &set) const {
        const Example &first = examples[static_cast<size_t>(set.front())];
        Symbol sym = first.action.symbol;
        double lo = first.value;
        double hi = first.value;
        for (int e : set) {
            const Example &ex = examples[static_cast<size_t>(e)];
            if (ex.action.symbol != sym) return false;
            lo = std::min(lo, ex.value);
            hi = std::max(hi, ex.value);
        }
        return hi - lo <= cfg.epsilon;
    }

    static double entropy(const std::map<std::pair<Symbol, double>, int> &counts,
                          int total) {
        double h = 0.0;
        for (const auto &kv : counts) {
            double p = static_cast<double>(kv.second) / total;
            h -= p * std::log2(p);
        }
        return h;
    }

    double score_paper(const std::vector<int> &satisfied) const {
        std::set<double> values;
        for (int e : satisfied) values.insert(examples[static_cast<size_t>(e)].value);
        return static_cast<double>(satisfied.size()) / static_cast<double>(values.size());
    }

    double score_infogain(const std::vector<int> &set,
                          const std::vector<int> &satisfied,
                          const std::vector<int> &rest) const {
        auto label_counts = [&](const std::vector<int> &part) {
            std::map<std::pair<Symbol, double>, int> counts;
            for (int e : part) {
                const Example &ex = examples[static_cast<size_t>(e)];
                ++counts[{ex.action.symbol, ex.value}];
            }
            return counts;
        };
        int total = static_cast<int>(set.size());
        auto all = label_counts(set);
        auto pos = label_counts(satisfied);
        auto neg = label_counts(rest);
        double gain = entropy(all, total);
        gain -= (static_cast<double>(satisfied.size()) / total) *
                entropy(pos, static_cast<int>(satisfied.size()));
        gain -= (static_cast<double>(rest.size()) / total) *
                entropy(neg, static_cast<int>(rest.size()));
        return gain;
    }

    // Pick the best proper splitter from `avail` for `set`, or -1.
    int select(const std::vector<int> &set, const std::vector<int> &avail) {
        int best = -1;
        double best_score = 0.0;
        for (int id : avail) {
            std::vector<int> satisfied;
            std::vector<int> rest;
            for (int e : set)
                (sat(e, id) ? satisfied : rest).push_back(e);
            if (satisfied.empty() || rest.empty()) continue;
            double s = cfg.selector == Selector::PAPER
                           ? score_paper(satisfied)
                           : score_infogain(set, satisfied, rest);
            if (best < 0 || s > best_score + 1e-12) {
                best = id;
                best_score = s;
            } else if (s >= best_score - 1e-12) {
                // Tie: prefer shallower, then lower id. Ids ascend through the
                // loop, so only a strictly shallower candidate can displace.
                if (space.hyp(id).depth < space.hyp(best).depth) {
                    best = id;
                    best_score = s;
                }
            }
        }
        return best;
    }

    // Grow layer `depth` of the shared space from the sources visible to this
    // branch, gating sources (and keeping results) by satisfiability against
    // `set` when pruning is on. Survivors are merged into `avail` sorted.
    void expand(int depth, const std::vector<int> &set, std::vector<int> &avail) {
        std::vector<int> sources;
        for (int id : avail) {
            if (space.hyp(id).depth != depth - 1) continue;
            if (cfg.prune) {
                bool any = false;
                for (int e : set)
                    if (sat(e, id)) { any = true; break; }
                if (!any) continue;
            }
            sources.push_back(id);
        }
        size_t before = space.size();
        std::vector<int> produced = space.expand_layer(depth, &sources);
        for (int id : produced) {
            if (cfg.prune) {
                bool any = false;
                for (int e : set)
                    if (sat(e, id)) { any = true; break; }
                if (!any) {
                    if (static_cast<size_t>(id) >= before) ++report.hypotheses_pruned;
                    continue;
                }
            }
            auto it = std::lower_bound(avail.begin(), avail.end(), id);
            if (it == avail.end() || *it != id) avail.insert(it, id);
        }
    }

    int make_leaf(const std::vector<int> &set, std::vector<int> avail, int branch_n) {
        int idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        const Example &first = examples[static_cast<size_t>(set.front())];
        Symbol sym = first.action.symbol;
        double value = first.value;
        for (int e : set) value = std::min(value, examples[static_cast<size_t>(e)].value);

        auto collect_binders = [&]() {
            std::vector<int> out;
            for (int id : avail) {
                const Hypothesis &h = space.hyp(id);
                if (h.depth < 1 || h.stoch_action != sym) continue;
                bool all = true;
                for (int e : set)
                    if (!sat(e, id)) { all = false; break; }
                if (all) out.push_back(id);
            }
            return out;
        };

        std::vector<int> binders = collect_binders();
        const StochActionDecl *decl = inst.domain().find_stoch(sym);
        bool parameterized = decl != nullptr && !decl->params.empty();
        if (parameterized && binders.empty()) {
            // A ground leaf action cannot generalize; grow the space until
            // some regression of this action covers every example here.
            while (binders.empty() && branch_n < cfg.max_n) {
                ++branch_n;
                expand(branch_n, set, avail);
                binders = collect_binders();
            }
            if (binders.empty())
                raise(ErrorCode::NO_BINDER,
                      "no hypothesis binds parameters of leaf action " +
                          sym.str() + " (value " + fmt_value(value) + ")");
        }
        // A binder's lineage is a plan sketch: each hop commits to one
        // outcome of one stochastic action. Rank sketches by how likely
        // nature is to follow them (product of best-case outcome odds),
        // then by how few real actions they regress through — noop hops
        // leave the formula untouched and carry no lookahead.
        Symbol na("NA");
        auto hop_odds = [&](const Hypothesis &h) {
            const StochActionDecl *sd = inst.domain().find_stoch(h.stoch_action);
            if (sd == nullptr) return 1.0;
            for (size_t i = 0; i < sd->choices.size(); ++i) {
                if (sd->choices[i] != h.det_action) continue;
                double best = 0.0;
                for (const CaseBranch &br : sd->probs[i].branches)
                    best = std::max(best, br.value);
                return best;
            }
            return 1.0;
        };
        auto plan_rank = [&](int id) {
            double odds = 1.0;
            int eff = 0;
            for (const Hypothesis *h = &space.hyp(id); h->parent >= 0;
                 h = &space.hyp(h->parent)) {
                odds *= hop_odds(*h);
                if (!(inst.domain().has_noop && h->det_action == na)) ++eff;
            }
            return std::make_pair(odds, eff);
        };
        std::stable_sort(binders.begin(), binders.end(), [&](int a, int b) {
            const Hypothesis &ha = space.hyp(a);
            const Hypothesis &hb = space.hyp(b);
            if (ha.seed_value != hb.seed_value) return ha.seed_value > hb.seed_value;
            auto [oa, ea] = plan_rank(a);
            auto [ob, eb] = plan_rank(b);
            if (oa != ob) return oa > ob;
            if (ea != eb) return ea < eb;
            if (ha.depth != hb.depth) return ha.depth < hb.depth;
            return a < b;
        });

        TreeNode node;
        node.kind = TreeNode::Kind::SUCCESS;
        node.action = sym;
        node.value = value;
        node.binders = std::move(binders);
        tree.nodes[static_cast<size_t>(idx)] = std::move(node);
        return idx;
    }

    int build(const std::vector<int> &set, std::vector<int> avail, int branch_n) {
        if (pure(set)) return make_leaf(set, std::move(avail), branch_n);

        if (cfg.deepening == Deepening::EAGER && !eager_deepened) {
            eager_deepened = true;
            while (branch_n < cfg.max_n) {
                ++branch_n;
                expand(branch_n, set, avail);
            }
        }

        int chosen = select(set, avail);
        while (chosen < 0) {
            if (branch_n >= cfg.max_n) {
                int idx = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back(); // default kind is FAILURE
                return idx;
            }
            ++branch_n;
            expand(branch_n, set, avail);
            chosen = select(set, avail);
        }

        std::vector<int> pos_set;
        std::vector<int> neg_set;
        for (int e : set)
            (sat(e, chosen) ? pos_set : neg_set).push_back(e);

        // The chosen hypothesis stays available below: it can never be
        // re-selected (it no longer splits either child properly), and the
        // positive leaf under it typically wants it back as a binder.
        int idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        int pos_idx = build(pos_set, avail, branch_n);
        int neg_idx = build(neg_set, avail, branch_n);

        TreeNode node;
        node.kind = TreeNode::Kind::SPLIT;
        node.hyp = chosen;
        node.pos = pos_idx;
        node.neg = neg_idx;
        tree.nodes[static_cast<size_t>(idx)] = std::move(node);
        return idx;
    }
};

} // namespace

DecisionTree build_tree(const std::vector<Example> &examples,
                        const LearnerConfig &cfg, HypothesisSpace &space,
                        const Instance &inst, BuildReport *report) {
    if (examples.empty())
        raise(ErrorCode::EMPTY_EXAMPLES, "cannot induce a tree from zero examples");

    Builder builder(examples, cfg, space, inst);
    builder.report.examples = static_cast<int>(examples.size());

    std::vector<int> all;
    all.reserve(examples.size());
    for (size_t i = 0; i < examples.size(); ++i) all.push_back(static_cast<int>(i));

    std::vector<int> avail;
    avail.reserve(space.size());
    for (size_t i = 0; i < space.size(); ++i) avail.push_back(static_cast<int>(i));

    builder.tree.root = builder.build(all, std::move(avail), space.depth());

    builder.report.hypotheses_generated = static_cast<int>(space.size());
    builder.report.model_checks = builder.table.checks();
    builder.report.max_depth_reached = space.depth();
    builder.report.split_nodes = builder.tree.count(TreeNode::Kind::SPLIT);
    builder.report.success_leaves = builder.tree.count(TreeNode::Kind::SUCCESS);
    builder.report.failure_leaves = builder.tree.count(TreeNode::Kind::FAILURE);
    if (report != nullptr) *report = builder.report;
    return builder.tree;
}

namespace {

void print_node(const DecisionTree &tree, const DomainSpec &domain, int idx,
                int indent, std::ostringstream &out) {
    const TreeNode &node = tree.nodes.at(static_cast<size_t>(idx));
    std::string pad(static_cast<size_t>(indent) * 2, ' ');
    switch (node.kind) {
    case TreeNode::Kind::SPLIT:
        out << pad << "(split :hyp " << node.hyp << "\n";
        out << pad << "  (pos\n";
        print_node(tree, domain, node.pos, indent + 2, out);
        out << pad << "  )\n";
        out << pad << "  (neg\n";
        print_node(tree, domain, node.neg, indent + 2, out);
        out << pad << "  )\n";
        out << pad << ")\n";
        break;
    case TreeNode::Kind::SUCCESS: {
        out << pad << "(leaf :action (" << node.action.str();
        const StochActionDecl *decl = domain.find_stoch(node.action);
        if (decl != nullptr)
            for (const Symbol &p : decl->params) out << " " << p.str();
        out << ") :value " << fmt_value(node.value) << " :binders (";
        for (size_t i = 0; i < node.binders.size(); ++i) {
            if (i > 0) out << " ";
            out << node.binders[i];
        }
        out << "))\n";
        break;
    }
    case TreeNode::Kind::FAILURE:
        out << pad << "(fail)\n";
        break;
    }
}

int parse_node(const Sexpr &form, const DomainSpec &domain, DecisionTree &tree);

int parse_split(const Sexpr &form, const DomainSpec &domain, DecisionTree &tree) {
    int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    int hyp = -1;
    const Sexpr *pos_form = nullptr;
    const Sexpr *neg_form = nullptr;
    for (size_t i = 1; i < form.size(); ++i) {
        const Sexpr &item = form.at(i);
        if (item.is_atom() && item.atom == ":hyp") {
            if (i + 1 >= form.size() || !form.at(i + 1).is_atom())
                raise(ErrorCode::SYNTAX, ":hyp needs an id at " + form.pos.to_string());
            hyp = std::stoi(form.at(i + 1).atom);
            ++i;
        } else if (item.is_list() && item.size() >= 1 && item.at(0).is_atom() &&
                   item.at(0).atom == "pos") {
            pos_form = &item;
        } else if (item.is_list() && item.size() >= 1 && item.at(0).is_atom() &&
                   item.at(0).atom == "neg") {
            neg_form = &item;
        } else {
            raise(ErrorCode::SYNTAX,
                  "unexpected split element at " + item.pos.to_string());
        }
    }
    if (hyp < 0 || pos_form == nullptr || neg_form == nullptr ||
        pos_form->size() != 2 || neg_form->size() != 2)
        raise(ErrorCode::SYNTAX,
              "split needs :hyp, (pos ...) and (neg ...) at " + form.pos.to_string());
    int pos_idx = parse_node(pos_form->at(1), domain, tree);
    int neg_idx = parse_node(neg_form->at(1), domain, tree);
    TreeNode node;
    node.kind = TreeNode::Kind::SPLIT;
    node.hyp = hyp;
    node.pos = pos_idx;
    node.neg = neg_idx;
    tree.nodes[static_cast<size_t>(idx)] = std::move(node);
    return idx;
}

int parse_leaf(const Sexpr &form, const DomainSpec &domain, DecisionTree &tree) {
    TreeNode node;
    node.kind = TreeNode::Kind::SUCCESS;
    bool saw_action = false;
    bool saw_value = false;
    for (size_t i = 1; i < form.size(); ++i) {
        const Sexpr &key = form.at(i);
        if (!key.is_atom() || i + 1 >= form.size())
            raise(ErrorCode::SYNTAX, "malformed leaf at " + form.pos.to_string());
        const Sexpr &val = form.at(i + 1);
        ++i;
        if (key.atom == ":action") {
            if (!val.is_list() || val.size() < 1 || !val.at(0).is_atom())
                raise(ErrorCode::SYNTAX,
                      "leaf :action must be a list at " + val.pos.to_string());
            Symbol sym = Symbol(val.at(0).atom);
            if (domain.find_stoch(sym) == nullptr)
                raise(ErrorCode::UNKNOWN_SYMBOL,
                      "unknown action " + sym.str() + " at " + val.pos.to_string());
            node.action = sym;
            saw_action = true;
        } else if (key.atom == ":value") {
            if (!val.is_atom())
                raise(ErrorCode::SYNTAX,
                      "leaf :value must be a number at " + val.pos.to_string());
            node.value = std::stod(val.atom);
            saw_value = true;
        } else if (key.atom == ":binders") {
            if (!val.is_list())
                raise(ErrorCode::SYNTAX,
                      "leaf :binders must be a list at " + val.pos.to_string());
            for (size_t k = 0; k < val.size(); ++k) {
                if (!val.at(k).is_atom())
                    raise(ErrorCode::SYNTAX,
                          "binder ids must be atoms at " + val.at(k).pos.to_string());
                node.binders.push_back(std::stoi(val.at(k).atom));
            }
        } else {
            raise(ErrorCode::SYNTAX,
                  "unknown leaf key " + key.atom + " at " + key.pos.to_string());
        }
    }
    if (!saw_action || !saw_value)
        raise(ErrorCode::SYNTAX,
              "leaf needs :action and :value at " + form.pos.to_string());
    int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(std::move(node));
    return idx;
}

int parse_node(const Sexpr &form, const DomainSpec &domain, DecisionTree &tree) {
    if (!form.is_list() || form.size() < 1 || !form.at(0).is_atom())
        raise(ErrorCode::SYNTAX, "expected a tree node at " + form.pos.to_string());
    const std::string &head = form.at(0).atom;
    if (head == "split") return parse_split(form, domain, tree);
    if (head == "leaf") return parse_leaf(form, domain, tree);
    if (head == "fail") {
        int idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        return idx;
    }
    raise(ErrorCode::SYNTAX, "unknown tree node " + head + " at " + form.pos.to_string());
}

} // namespace

std::string print_tree(const DecisionTree &tree, const DomainSpec &domain) {
    std::ostringstream out;
    if (!tree.nodes.empty()) print_node(tree, domain, tree.root, 0, out);
    return out.str();
}

DecisionTree parse_tree(const std::string &text, const DomainSpec &domain) {
    std::vector<Sexpr> forms = parse_sexprs(text);
    if (forms.size() != 1)
        raise(ErrorCode::SYNTAX, "expected exactly one tree form");
    DecisionTree tree;
    tree.root = parse_node(forms[0], domain, tree);
    return tree;
}

} // namespace gpi

#include "doctest.h"

#include "gpi/domain.hpp"
#include "gpi/errors.hpp"
#include "gpi/ground.hpp"
#include "gpi/sexpr.hpp"
#include "gpi/solve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

using namespace gpi;

namespace {

std::string fixture(const std::string &name) {
    return read_file(std::string(FIXTURE_DIR) + "/" + name);
}

Instance load(const std::string &dom, const std::string &inst, DomainSpec &out) {
    out = parse_domain(fixture(dom));
    return Instance(out, parse_instance(fixture(inst), out));
}

// Shortest move-count from each state to a goal-guard state, following the
// stochastic actions' best-case successors. -1 marks unreachable.
std::vector<int> bfs_goal_distance(const GroundMDP &mdp) {
    const Instance &inst = *mdp.instance;
    std::size_t n = inst.states().size();
    std::vector<int> dist(n, -1);
    std::queue<int> q;
    for (std::size_t i = 0; i < n; i++) {
        if (goal_guard(inst, inst.states()[i])) {
            dist[i] = 0;
            q.push(static_cast<int>(i));
        }
    }
    // Reverse adjacency over every positive-probability transition.
    std::vector<std::vector<int>> preds(n);
    for (std::size_t s = 0; s < n; s++)
        for (const StochOutcome &o : mdp.actions[s])
            for (const Transition &t : o.transitions)
                if (t.prob > 0) preds[static_cast<std::size_t>(t.succ)].push_back(static_cast<int>(s));
    while (!q.empty()) {
        int s = q.front();
        q.pop();
        for (int p : preds[static_cast<std::size_t>(s)])
            if (dist[static_cast<std::size_t>(p)] < 0) {
                dist[static_cast<std::size_t>(p)] = dist[static_cast<std::size_t>(s)] + 1;
                q.push(p);
            }
    }
    return dist;
}

// Plain synchronous value iteration written independently of the library.
std::vector<double> naive_vi(const GroundMDP &mdp, double beta, double tol) {
    std::size_t n = mdp.reward.size();
    std::vector<double> v(n, 0.0), next(n, 0.0);
    for (;;) {
        double delta = 0.0;
        for (std::size_t s = 0; s < n; s++) {
            double best = 0.0;
            bool any = false;
            for (const StochOutcome &o : mdp.actions[s]) {
                double q = 0.0;
                for (const Transition &t : o.transitions)
                    q += t.prob * v[static_cast<std::size_t>(t.succ)];
                if (!any || q > best) best = q;
                any = true;
            }
            next[s] = mdp.reward[s] + beta * (any ? best : 0.0);
            delta = std::max(delta, std::fabs(next[s] - v[s]));
        }
        v.swap(next);
        if (delta < tol) return v;
    }
}

} // namespace

TEST_CASE("optimal values are geometric in the goal distance when moves are sure") {
    // With reward only at goal states and a no-op to stay there, the optimal
    // value is 100/(1-beta) at the goal and beta^d of that at distance d.
    for (const char *pair : {"bw-ex.rmdp bw-3.inst", "lg-ex.rmdp lg-2.inst"}) {
        std::string p(pair);
        auto cut = p.find(' ');
        DomainSpec d;
        Instance inst = load(p.substr(0, cut), p.substr(cut + 1), d);
        GroundMDP mdp = GroundMDP::build(inst);
        ValueTable vt = value_iteration(mdp);
        std::vector<int> dist = bfs_goal_distance(mdp);
        double top = 100.0 / (1.0 - 0.95);
        for (std::size_t i = 0; i < dist.size(); i++) {
            REQUIRE(dist[i] >= 0);
            CHECK(vt.value[i] == doctest::Approx(top * std::pow(0.95, dist[i])).epsilon(1e-9));
        }
    }
}

TEST_CASE("optimal values stay geometric when the goal cannot be held") {
    // Without a no-op the best play at the goal leaves and comes back, so
    // the goal value solves v = 100 + beta^2 v.
    DomainSpec d;
    Instance inst = load("bw-all.rmdp", "bw-all-4.inst", d);
    GroundMDP mdp = GroundMDP::build(inst);
    ValueTable vt = value_iteration(mdp);
    std::vector<int> dist = bfs_goal_distance(mdp);
    double top = 100.0 / (1.0 - 0.95 * 0.95);
    for (std::size_t i = 0; i < dist.size(); i++) {
        REQUIRE(dist[i] >= 0);
        CHECK(vt.value[i] == doctest::Approx(top * std::pow(0.95, dist[i])).epsilon(1e-9));
    }
    // Distance level sizes double as a check on the example histograms used
    // by the generalization experiments.
    std::map<int, int> level;
    for (int x : dist) level[x]++;
    CHECK(level[0] == 1);
    CHECK(level[1] == 1);
    CHECK(level[2] == 2);
    CHECK(level[3] == 7);
    CHECK(level[4] == 21);
    CHECK(level[5] == 26);
    CHECK(level[6] == 15);
}

TEST_CASE("value iteration agrees with an independent solver on a stochastic domain") {
    DomainSpec d;
    Instance inst = load("bw-rain.rmdp", "bw-rain-3.inst", d);
    GroundMDP mdp = GroundMDP::build(inst);
    ValueTable vt = value_iteration(mdp);
    std::vector<double> ref = naive_vi(mdp, 0.95, 1e-12);
    for (std::size_t i = 0; i < ref.size(); i++)
        CHECK(vt.value[i] == doctest::Approx(ref[i]).epsilon(1e-7));
}

TEST_CASE("ground actions carry full probability mass to valid successors") {
    DomainSpec d;
    Instance inst = load("bw-ex-s.rmdp", "bw-3.inst", d);
    GroundMDP mdp = GroundMDP::build(inst);
    int n = static_cast<int>(inst.states().size());
    for (int s = 0; s < n; s++) {
        for (const StochOutcome &o : mdp.actions[s]) {
            double mass = 0.0;
            for (const Transition &t : o.transitions) {
                CHECK(t.succ >= 0);
                CHECK(t.succ < n);
                CHECK(t.prob > 0.0);
                mass += t.prob;
            }
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(mdp.reward[static_cast<std::size_t>(s)] ==
              doctest::Approx(inst.case_value(inst.states()[s], d.reward)));
    }
}

TEST_CASE("outcomes landing in the same state merge their probability") {
    DomainSpec d;
    Instance inst = load("bw-ex-s.rmdp", "bw-3.inst", d);
    GroundMDP mdp = GroundMDP::build(inst);
    // Moving onto the table: the intended move and the dropped move coincide,
    // so the distribution collapses to a single certain transition. Moving
    // onto a block keeps the 0.8 / 0.2 split.
    bool saw_merged = false, saw_split = false;
    for (std::size_t s = 0; s < inst.states().size(); s++) {
        for (const StochOutcome &o : mdp.actions[s]) {
            if (o.action.symbol != Symbol("move")) continue;
            REQUIRE(o.action.args.size() == 2);
            if (o.action.args[1] == Symbol("table")) {
                REQUIRE(o.transitions.size() == 1);
                CHECK(o.transitions[0].prob == doctest::Approx(1.0));
                saw_merged = true;
            } else {
                REQUIRE(o.transitions.size() == 2);
                std::vector<double> probs = {o.transitions[0].prob, o.transitions[1].prob};
                std::sort(probs.begin(), probs.end());
                CHECK(probs[0] == doctest::Approx(0.2));
                CHECK(probs[1] == doctest::Approx(0.8));
                saw_split = true;
            }
        }
    }
    CHECK(saw_merged);
    CHECK(saw_split);
}

TEST_CASE("greedy actions maximize the one-step lookahead with lexicographic ties") {
    DomainSpec d;
    Instance inst = load("bw-rain.rmdp", "bw-rain-3.inst", d);
    GroundMDP mdp = GroundMDP::build(inst);
    ValueTable vt = value_iteration(mdp);
    for (std::size_t s = 0; s < inst.states().size(); s++) {
        REQUIRE(!mdp.actions[s].empty());
        double best = -1.0;
        for (const StochOutcome &o : mdp.actions[s])
            best = std::max(best, q_value(mdp, vt, 0.95, static_cast<int>(s), o));
        GroundAction expect;
        bool found = false;
        for (const StochOutcome &o : mdp.actions[s]) {
            double q = q_value(mdp, vt, 0.95, static_cast<int>(s), o);
            if (q >= best - 1e-9 && (!found || o.action < expect)) {
                expect = o.action;
                found = true;
            }
        }
        CHECK(greedy_action(mdp, vt, 0.95, static_cast<int>(s)) == expect);
    }
}

TEST_CASE("snapped values cluster and the ladder descends without duplicates") {
    DomainSpec d;
    Instance inst = load("lg-ex.rmdp", "lg-2.inst", d);
    GroundMDP mdp = GroundMDP::build(inst);
    ValueTable vt = value_iteration(mdp);
    std::set<double> snapped(vt.snapped.begin(), vt.snapped.end());
    for (std::size_t i = 0; i < vt.value.size(); i++)
        CHECK(std::fabs(vt.snapped[i] - vt.value[i]) <= 1e-6);
    REQUIRE(vt.ladder.size() == snapped.size());
    for (std::size_t i = 0; i < vt.ladder.size(); i++) {
        CHECK(snapped.count(vt.ladder[i]) == 1);
        if (i > 0) CHECK(vt.ladder[i] < vt.ladder[i - 1] - 1e-6);
    }
}

TEST_CASE("one example per state records the greedy policy") {
    DomainSpec d;
    Instance inst = load("bw-ex.rmdp", "bw-3.inst", d);
    GroundMDP mdp = GroundMDP::build(inst);
    ValueTable vt = value_iteration(mdp);
    std::vector<Example> ex = make_examples(mdp, vt, 0.95, ExampleKind::P);
    REQUIRE(ex.size() == inst.states().size());
    for (std::size_t i = 0; i < ex.size(); i++) {
        int idx = inst.state_index(ex[i].state);
        REQUIRE(idx >= 0);
        CHECK(ex[i].value == doctest::Approx(vt.snapped[static_cast<std::size_t>(idx)]));
        CHECK(ex[i].action == greedy_action(mdp, vt, 0.95, idx));
    }
    // All states appear exactly once.
    std::set<int> seen;
    for (const Example &e : ex) seen.insert(inst.state_index(e.state));
    CHECK(seen.size() == ex.size());
}

TEST_CASE("a trajectory records the greedy walk and stops at the goal") {
    DomainSpec d;
    Instance inst = load("bw-ex.rmdp", "bw-3.inst", d);
    GroundMDP mdp = GroundMDP::build(inst);
    ValueTable vt = value_iteration(mdp);
    std::vector<int> dist = bfs_goal_distance(mdp);

    int start = -1;
    for (std::size_t i = 0; i < dist.size(); i++)
        if (dist[i] == 2) start = static_cast<int>(i);
    REQUIRE(start >= 0);

    std::vector<int> starts = {start};
    std::vector<Example> ex = make_examples(mdp, vt, 0.95, ExampleKind::T, &starts);
    REQUIRE(ex.size() == 2);
    CHECK(inst.state_index(ex[0].state) == start);
    CHECK(ex[0].value == doctest::Approx(2000.0 * 0.95 * 0.95));
    CHECK(ex[1].value == doctest::Approx(2000.0 * 0.95));
    // The second example is the greedy successor of the first.
    State succ = inst.transition(ex[0].state, GroundAction{Symbol("moveS"), ex[0].action.args});
    CHECK(inst.state_index(succ) == inst.state_index(ex[1].state));
}

TEST_CASE("a trajectory started at the goal records it and stops on the revisit") {
    DomainSpec d;
    Instance inst = load("bw-ex.rmdp", "bw-3.inst", d);
    GroundMDP mdp = GroundMDP::build(inst);
    ValueTable vt = value_iteration(mdp);
    int goal = -1;
    for (std::size_t i = 0; i < inst.states().size(); i++)
        if (goal_guard(inst, inst.states()[i])) goal = static_cast<int>(i);
    REQUIRE(goal >= 0);
    std::vector<int> starts = {goal};
    std::vector<Example> ex = make_examples(mdp, vt, 0.95, ExampleKind::T, &starts);
    REQUIRE(ex.size() == 1);
    CHECK(ex[0].value == doctest::Approx(2000.0));
    CHECK(ex[0].action.symbol == Symbol("NA"));
}

TEST_CASE("a walk across a value plateau stops before repeating the value") {
    const char *dom = R"((domain flat)
(fluent (P 0) (Q 0))
(det-action (tog) :poss true)
(ssa (P) (P))
(ssa (Q) (or (and (Q) (not (act= (tog)))) (and (not (Q)) (act= (tog)))))
(stoch-action (s) :choices ((tog)) :prob ((tog) (case (true 1))))
(reward (case ((P) 100) ((not (P)) 0)))
)";
    DomainSpec d = parse_domain(dom);
    InstanceSpec spec = parse_instance("(objects o1)\n(seed)\n", d);
    Instance inst(d, spec);
    GroundMDP mdp = GroundMDP::build(inst);
    ValueTable vt = value_iteration(mdp);
    REQUIRE(inst.states().size() == 2);
    CHECK(vt.value[0] == doctest::Approx(0.0));
    CHECK(vt.value[1] == doctest::Approx(0.0));
    // Toggling changes the state but not the value; the walk must not loop.
    std::vector<int> starts = {0};
    std::vector<Example> ex = make_examples(mdp, vt, 0.95, ExampleKind::T, &starts);
    REQUIRE(ex.size() == 1);
    CHECK(inst.state_index(ex[0].state) == 0);
}

TEST_CASE("duplicate states across trajectories are kept once") {
    DomainSpec d;
    Instance inst = load("bw-ex.rmdp", "bw-3.inst", d);
    GroundMDP mdp = GroundMDP::build(inst);
    ValueTable vt = value_iteration(mdp);
    // Walking from every state covers each state exactly once, matching the
    // per-state data in content.
    std::vector<Example> trail = make_examples(mdp, vt, 0.95, ExampleKind::T);
    std::vector<Example> per_state = make_examples(mdp, vt, 0.95, ExampleKind::P);
    REQUIRE(trail.size() == per_state.size());
    std::map<int, const Example *> by_state;
    for (const Example &e : trail) {
        int idx = inst.state_index(e.state);
        CHECK(by_state.find(idx) == by_state.end());
        by_state[idx] = &e;
    }
    for (const Example &e : per_state) {
        const Example *t = by_state.at(inst.state_index(e.state));
        CHECK(t->value == doctest::Approx(e.value));
        CHECK(t->action == e.action);
    }
}

TEST_CASE("trajectories follow the most likely outcome of each choice") {
    DomainSpec d;
    Instance inst = load("bw-ex-s.rmdp", "bw-3.inst", d);
    GroundMDP mdp = GroundMDP::build(inst);
    ValueTable vt = value_iteration(mdp);
    // From a single 3-tower the greedy move unstacks the top block; with
    // probability 0.8 it lands where intended, and the walk assumes it does.
    State tower;
    tower.atoms = {GroundAtom{Symbol("On"), {Symbol("a"), Symbol("b")}},
                   GroundAtom{Symbol("On"), {Symbol("b"), Symbol("c")}},
                   GroundAtom{Symbol("On"), {Symbol("c"), Symbol("table")}}};
    int start = inst.state_index(tower);
    REQUIRE(start >= 0);
    std::vector<int> starts = {start};
    std::vector<Example> ex = make_examples(mdp, vt, 0.95, ExampleKind::T, &starts);
    REQUIRE(ex.size() == 2);
    CHECK(inst.state_index(ex[0].state) == start);
    // The recorded successor example is the intended (moveS) outcome.
    State succ = inst.transition(tower, GroundAction{Symbol("moveS"), ex[0].action.args});
    CHECK(inst.state_index(ex[1].state) == inst.state_index(succ));
    CHECK(ex[1].value > ex[0].value);
}

TEST_CASE("goal guard marks exactly the top reward case") {
    DomainSpec d;
    Instance inst = load("lg-ex.rmdp", "lg-2.inst", d);
    int goals = 0;
    for (const State &s : inst.states()) {
        bool g = goal_guard(inst, s);
        CHECK(g == (inst.case_value(s, d.reward) == 100.0));
        if (g) goals++;
    }
    CHECK(goals == 28);
}

TEST_CASE("example records survive a print and parse round trip") {
    DomainSpec d;
    Instance inst = load("bw-ex.rmdp", "bw-3.inst", d);
    GroundMDP mdp = GroundMDP::build(inst);
    ValueTable vt = value_iteration(mdp);
    std::vector<Example> ex = make_examples(mdp, vt, 0.95, ExampleKind::P);
    std::vector<Example> back = parse_examples(print_examples(ex), d);
    REQUIRE(back.size() == ex.size());
    for (std::size_t i = 0; i < ex.size(); i++) {
        CHECK(back[i].value == doctest::Approx(ex[i].value).epsilon(1e-12));
        CHECK(back[i].action == ex[i].action);
        CHECK(back[i].state == ex[i].state);
    }
}

#include "doctest.h"

#include "gpi/domain.hpp"
#include "gpi/errors.hpp"
#include "gpi/ground.hpp"
#include "gpi/sexpr.hpp"

#include "oracle.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace gpi;

namespace {

std::string fixture(const std::string &name) {
    return read_file(std::string(FIXTURE_DIR) + "/" + name);
}

Instance make(const std::string &domain, const std::string &inst) {
    static std::map<std::string, DomainSpec> cache;
    auto it = cache.find(domain);
    if (it == cache.end())
        it = cache.emplace(domain, parse_domain(fixture(domain))).first;
    return Instance(it->second, parse_instance(fixture(inst), it->second));
}

// Every stable stacking of `blocks`: each block rests on the table or on a
// distinct block, nothing rests on a carried... cycles are impossible in a
// well-founded stack, and no two blocks share a support block.
std::set<State> brute_towers(const std::vector<Symbol> &blocks) {
    Symbol table("table"), on("On");
    std::set<State> out;
    std::vector<int> support(blocks.size(), -1);  // -1 = table
    auto valid = [&]() {
        std::vector<int> load(blocks.size(), 0);
        for (std::size_t i = 0; i < blocks.size(); i++)
            if (support[i] >= 0 && ++load[support[i]] > 1) return false;
        // Walking upward from any block must reach the table.
        for (std::size_t i = 0; i < blocks.size(); i++) {
            int steps = 0, at = static_cast<int>(i);
            while (support[at] >= 0) {
                at = support[at];
                if (++steps > static_cast<int>(blocks.size())) return false;
            }
        }
        return true;
    };
    std::vector<std::size_t> stack;
    auto rec = [&](auto &&self, std::size_t i) -> void {
        if (i == blocks.size()) {
            if (!valid()) return;
            State e;
            for (std::size_t j = 0; j < blocks.size(); j++)
                e.atoms.push_back({on, {blocks[j], support[j] < 0
                                                      ? table
                                                      : blocks[support[j]]}});
            std::sort(e.atoms.begin(), e.atoms.end());
            out.insert(std::move(e));
            return;
        }
        support[i] = -1;
        self(self, i + 1);
        for (std::size_t j = 0; j < blocks.size(); j++) {
            if (j == i) continue;
            support[i] = static_cast<int>(j);
            self(self, i + 1);
        }
        support[i] = -1;
    };
    rec(rec, 0);
    return out;
}

oracle::World to_world(const Instance &inst, const State &e) {
    oracle::World w;
    w.universe = inst.objects();
    for (const GroundAtom &a : e.atoms) w.fluents.insert({a.pred, a.args});
    // The static database is not exposed directly; rebuild it by probing.
    for (const PredSig &p : inst.domain().statics) {
        std::vector<std::vector<Symbol>> tuples{{}};
        for (int i = 0; i < p.arity; i++) {
            std::vector<std::vector<Symbol>> next;
            for (const auto &t : tuples)
                for (Symbol o : inst.objects()) {
                    auto t2 = t;
                    t2.push_back(o);
                    next.push_back(std::move(t2));
                }
            tuples = std::move(next);
        }
        for (const auto &t : tuples)
            if (inst.static_true({p.name, t})) w.statics.insert({p.name, t});
    }
    return w;
}

}

TEST_CASE("reachable blocks-world states are exactly the stable towers") {
    Instance inst = make("bw-ex.rmdp", "bw-3.inst");
    std::set<State> got(inst.states().begin(), inst.states().end());
    std::set<State> want =
        brute_towers({Symbol("a"), Symbol("b"), Symbol("c")});
    CHECK(got.size() == 13);
    CHECK(got == want);
}

TEST_CASE("logistics states respect capacity and exclusivity") {
    Instance inst = make("lg-ex.rmdp", "lg-2.inst");
    CHECK(inst.states().size() == 56);
    Symbol bin("Bin"), tin("Tin"), on("On");
    for (const State &e : inst.states()) {
        std::map<Symbol, int> box_positions, truck_cities, truck_load;
        for (const GroundAtom &a : e.atoms) {
            if (a.pred == bin) box_positions[a.args[0]]++;
            if (a.pred == on) {
                box_positions[a.args[0]]++;
                truck_load[a.args[1]]++;
            }
            if (a.pred == tin) truck_cities[a.args[0]]++;
        }
        for (auto &[b, n] : box_positions) CHECK(n == 1);
        for (auto &[t, n] : truck_cities) CHECK(n == 1);
        CHECK(box_positions.size() == 2);
        CHECK(truck_cities.size() == 2);
        for (auto &[t, n] : truck_load) CHECK(n <= 1);
    }
}

TEST_CASE("state enumeration is deterministic") {
    Instance a = make("lg-ex.rmdp", "lg-2.inst");
    Instance b = make("lg-ex.rmdp", "lg-2.inst");
    REQUIRE(a.states().size() == b.states().size());
    for (std::size_t i = 0; i < a.states().size(); i++)
        CHECK(a.states()[i] == b.states()[i]);
    for (std::size_t i = 0; i < a.states().size(); i++)
        CHECK(a.state_index(a.states()[i]) == static_cast<int>(i));
}

TEST_CASE("truth evaluation agrees with a brute-force interpreter") {
    Instance inst = make("lg-ex.rmdp", "lg-2.inst");
    const DomainSpec &d = inst.domain();
    std::vector<Formula> formulas;
    for (const CaseBranch &br : d.reward.branches) formulas.push_back(br.guard);
    formulas.push_back(parse_formula_text(
        "(forall (t) (or (not (Truck t)) (exists (c) (and (City c) (Tin t c)))))", d));
    formulas.push_back(parse_formula_text(
        "(exists (b t) (and (On b t) (Tin t Syd)))", d));
    formulas.push_back(parse_formula_text(
        "(forall (b) (or (not (Box b)) (not (Bin b Syd))))", d));
    for (const State &e : inst.states()) {
        oracle::World w = to_world(inst, e);
        for (const Formula &f : formulas) {
            CAPTURE(e.to_string());
            CAPTURE(f.to_string());
            CHECK(inst.holds(e, f) == oracle::eval(f, w, {}));
        }
    }
}

TEST_CASE("open formulas evaluate under explicit bindings") {
    Instance inst = make("bw-ex.rmdp", "bw-3.inst");
    const DetActionDecl *mv = inst.domain().find_det(Symbol("moveS"));
    REQUIRE(mv != nullptr);
    for (const State &e : inst.states()) {
        oracle::World w = to_world(inst, e);
        for (Symbol x : inst.objects())
            for (Symbol y : inst.objects()) {
                ObjectBinding bind{{Symbol("x"), x}, {Symbol("y"), y}};
                oracle::Env env{{Symbol("x"), x}, {Symbol("y"), y}};
                CHECK(inst.holds(e, mv->poss, bind) ==
                      oracle::eval(mv->poss, w, env));
            }
    }
}

TEST_CASE("witness enumeration matches the brute-force filter") {
    Instance inst = make("bw-ex.rmdp", "bw-3.inst");
    const DetActionDecl *mv = inst.domain().find_det(Symbol("moveS"));
    std::vector<Symbol> vars = mv->params;
    for (const State &e : inst.states()) {
        std::vector<std::vector<Symbol>> want;
        for (Symbol x : inst.objects())
            for (Symbol y : inst.objects())
                if (inst.holds(e, mv->poss, {{vars[0], x}, {vars[1], y}}))
                    want.push_back({x, y});
        CHECK(inst.witnesses(e, mv->poss, vars) == want);
    }
}

TEST_CASE("applicability mirrors the precondition") {
    Instance inst = make("lg-ex.rmdp", "lg-2.inst");
    for (const State &e : inst.states())
        for (const GroundAction &a : inst.ground_det_actions()) {
            const DetActionDecl *decl = inst.domain().find_det(a.symbol);
            REQUIRE(decl != nullptr);
            ObjectBinding bind;
            for (std::size_t i = 0; i < decl->params.size(); i++)
                bind[decl->params[i]] = a.args[i];
            CHECK(inst.applicable(e, a) == inst.holds(e, decl->poss, bind));
        }
}

TEST_CASE("successor states follow the update forms") {
    Instance inst = make("bw-ex.rmdp", "bw-3.inst");
    Symbol on("On"), table("table"), a("a"), b("b"), c("c");
    State flat = inst.seed_state();
    State succ = inst.transition(flat, {Symbol("moveS"), {a, b}});
    State want;
    want.atoms = {{on, {a, b}}, {on, {b, table}}, {on, {c, table}}};
    CHECK(succ == want);
    // Moving a off b restores the flat state: frame atoms persisted.
    CHECK(inst.transition(succ, {Symbol("moveS"), {a, table}}) == flat);
    CHECK_THROWS_AS(
        (void)inst.transition(flat, {Symbol("moveS"), {table, a}}), Error);
}

TEST_CASE("update forms without an action effect are inert") {
    Instance inst = make("bw-rain.rmdp", "bw-rain-3.inst");
    // moveF appears in no update form: nature chose a fizzle.
    for (const State &e : inst.states())
        for (Symbol x : inst.objects())
            for (Symbol y : inst.objects()) {
                GroundAction fz{Symbol("moveF"), {x, y}};
                if (inst.applicable(e, fz)) CHECK(inst.transition(e, fz) == e);
            }
}

TEST_CASE("an unchanging fluent keeps its seed truth everywhere") {
    Instance inst = make("bw-rain.rmdp", "bw-rain-3.inst");
    GroundAtom rain{Symbol("Rain"), {}};
    bool seeded = inst.seed_state().contains(rain);
    for (const State &e : inst.states()) CHECK(e.contains(rain) == seeded);
    CHECK(inst.states().size() == 13);
}

TEST_CASE("reward cases partition every reachable state") {
    struct Pair {
        const char *domain;
        const char *inst;
    };
    for (const Pair &p : {Pair{"bw-ex.rmdp", "bw-3.inst"},
                          Pair{"bw-all.rmdp", "bw-all-4.inst"},
                          Pair{"bw-rain.rmdp", "bw-rain-3.inst"},
                          Pair{"lg-ex.rmdp", "lg-2.inst"}}) {
        CAPTURE(p.domain);
        Instance inst = make(p.domain, p.inst);
        CHECK(inst.check_partition(inst.domain().reward, "reward").empty());
    }
}

TEST_CASE("case evaluation picks the single true branch") {
    Instance inst = make("bw-all.rmdp", "bw-all-4.inst");
    Symbol on("On"), table("table");
    State goal;
    goal.atoms = {{on, {Symbol("a"), Symbol("b")}},
                  {on, {Symbol("b"), Symbol("c")}},
                  {on, {Symbol("c"), Symbol("d")}},
                  {on, {Symbol("d"), table}}};
    CHECK(inst.case_value(goal, inst.domain().reward) == 100.0);
    CHECK(inst.case_value(inst.seed_state(), inst.domain().reward) == 0.0);
}

TEST_CASE("unreachable states index as -1") {
    Instance inst = make("bw-ex.rmdp", "bw-3.inst");
    State junk;
    junk.atoms = {{Symbol("On"), {Symbol("a"), Symbol("a")}}};
    CHECK(inst.state_index(junk) == -1);
}

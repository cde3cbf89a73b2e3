#include "doctest.h"

#include "gpi/domain.hpp"
#include "gpi/errors.hpp"
#include "gpi/sexpr.hpp"

#include <set>
#include <string>
#include <vector>

using namespace gpi;

namespace {

std::string fixture(const std::string &name) {
    return read_file(std::string(FIXTURE_DIR) + "/" + name);
}

bool has_code(const std::vector<Diagnostic> &ds, const std::string &code) {
    for (const Diagnostic &d : ds)
        if (d.code == code) return true;
    return false;
}

const char *kBroken = R"((domain broken)
(fluent (P 1) (Q 1))
(det-action (a x) :poss (P y))
(ssa (P u) (P u))
(ssa (Q u v) (Q u))
(stoch-action (s x) :choices ((a x)) :prob ((a x) (case (true 1.5))))
(reward (case (true 0)))
)";

}

TEST_CASE("domain parsing captures the declared structure") {
    DomainSpec d = parse_domain(fixture("bw-ex.rmdp"));
    CHECK(d.name == "bw-ex");
    REQUIRE(d.constants.size() == 1);
    CHECK(d.constants[0] == Symbol("table"));
    REQUIRE(d.fluents.size() == 1);
    CHECK(d.fluents[0].name == Symbol("On"));
    CHECK(d.fluents[0].arity == 2);

    const DetActionDecl *mv = d.find_det(Symbol("moveS"));
    REQUIRE(mv != nullptr);
    CHECK(mv->params == std::vector<Symbol>{Symbol("x"), Symbol("y")});

    const StochActionDecl *st = d.find_stoch(Symbol("move"));
    REQUIRE(st != nullptr);
    CHECK(st->choices == std::vector<Symbol>{Symbol("moveS")});
    REQUIRE(st->probs.size() == 1);
    REQUIRE(st->probs[0].branches.size() == 1);
    CHECK(st->probs[0].branches[0].value == 1.0);

    REQUIRE(d.reward.branches.size() == 2);
    CHECK(d.reward.branches[0].value == 100.0);
    CHECK(d.reward.branches[1].value == 0.0);

    // (noop) synthesizes the NA pair.
    CHECK(d.has_noop);
    CHECK(d.find_det(Symbol("NA")) != nullptr);
    const StochActionDecl *na = d.find_stoch(Symbol("NA"));
    REQUIRE(na != nullptr);
    CHECK(na->choices == std::vector<Symbol>{Symbol("NA")});
}

TEST_CASE("printing a parsed domain is a fixpoint") {
    for (const char *name : {"bw-ex.rmdp", "bw-ex-s.rmdp", "bw-all.rmdp",
                             "bw-all-s.rmdp", "bw-rain.rmdp", "lg-ex.rmdp",
                             "lg-ex-s.rmdp", "lg-all.rmdp", "lg-all-s.rmdp"}) {
        CAPTURE(name);
        DomainSpec d1 = parse_domain(fixture(name));
        std::string once = print_domain(d1);
        DomainSpec d2 = parse_domain(once);
        CHECK(print_domain(d2) == once);
    }
}

TEST_CASE("printing a parsed instance is a fixpoint") {
    struct Pair {
        const char *domain;
        const char *inst;
    };
    for (const Pair &p : {Pair{"bw-ex.rmdp", "bw-3.inst"},
                          Pair{"bw-all.rmdp", "bw-all-4.inst"},
                          Pair{"bw-rain.rmdp", "bw-rain-3.inst"},
                          Pair{"lg-ex.rmdp", "lg-2.inst"}}) {
        CAPTURE(p.inst);
        DomainSpec d = parse_domain(fixture(p.domain));
        InstanceSpec i1 = parse_instance(fixture(p.inst), d);
        CHECK(!i1.objects.empty());
        CHECK(!i1.seed.empty());
        std::string once = print_instance(i1);
        InstanceSpec i2 = parse_instance(once, d);
        CHECK(print_instance(i2) == once);
    }
}

TEST_CASE("bundled domains validate cleanly") {
    for (const char *name : {"bw-ex.rmdp", "bw-ex-s.rmdp", "bw-all.rmdp",
                             "bw-all-s.rmdp", "bw-rain.rmdp", "lg-ex.rmdp",
                             "lg-ex-s.rmdp", "lg-all.rmdp", "lg-all-s.rmdp"}) {
        CAPTURE(name);
        DomainSpec d = parse_domain(fixture(name));
        std::vector<Diagnostic> ds = validate(d);
        for (const Diagnostic &diag : ds) CAPTURE(diag.code + " " + diag.message);
        CHECK(ds.empty());
    }
}

TEST_CASE("validation reports structural defects") {
    DomainSpec d = parse_domain(kBroken);
    std::vector<Diagnostic> ds = validate(d);
    // The precondition of `a` leaks a free variable.
    CHECK(has_code(ds, "E_FREE_VAR"));
    // The form for Q carries the wrong parameter count.
    CHECK(has_code(ds, "E_ARITY"));
    // 1.5 is not a probability.
    CHECK(has_code(ds, "E_PROB_MASS"));
}

TEST_CASE("validation flags sub-unit outcome mass") {
    const char *text = R"((domain leaky)
(fluent (P 1))
(det-action (a x) :poss true)
(ssa (P u) (P u))
(stoch-action (s x) :choices ((a x)) :prob ((a x) (case (true 0.9))))
(reward (case (true 0)))
)";
    std::vector<Diagnostic> ds = validate(parse_domain(text));
    CHECK(has_code(ds, "W_PROB_MASS"));
}

TEST_CASE("validation flags choices with differing preconditions") {
    const char *text = R"((domain uneven)
(fluent (P 1))
(det-action (a x) :poss (P x))
(det-action (b x) :poss true)
(ssa (P u) (P u))
(stoch-action (s x) :choices ((a x) (b x))
  :prob ((a x) (case (true 0.5))) ((b x) (case (true 0.5))))
(reward (case (true 0)))
)";
    std::vector<Diagnostic> ds = validate(parse_domain(text));
    CHECK(has_code(ds, "E_POSS_MISMATCH"));
}

TEST_CASE("validation catches a fluent with no ssa form") {
    DomainSpec d;
    d.name = "bare";
    d.fluents.push_back({Symbol("P"), 1});
    CHECK(has_code(validate(d), "E_NO_SSA"));
}

TEST_CASE("parse errors carry specific codes") {
    auto code_of = [](const std::string &text) {
        try {
            parse_domain(text);
        } catch (const Error &e) {
            return e.code();
        }
        return ErrorCode::IO;  // sentinel: no error raised
    };
    CHECK(code_of("(domain x) (fluent (P 1)) (fluent (P 2))"
                  "(ssa (P u) (P u)) (reward (case (true 0)))") ==
          ErrorCode::DUPLICATE);
    CHECK(code_of("(domain x) (fluent (P 1)) (ssa (P u) (Q u))"
                  "(reward (case (true 0)))") == ErrorCode::UNKNOWN_SYMBOL);
    CHECK(code_of("(domain x) (fluent (P 1)) (ssa (P u) (P u u))"
                  "(reward (case (true 0)))") == ErrorCode::ARITY);
    CHECK(code_of("(domain x (") == ErrorCode::SYNTAX);
    CHECK(code_of("(domain x) (noop) (det-action (NA) :poss true)") ==
          ErrorCode::DUPLICATE);
}

TEST_CASE("instance parsing rejects unknown predicates and objects") {
    DomainSpec d = parse_domain(fixture("bw-ex.rmdp"));
    auto code_of = [&](const std::string &text) {
        try {
            parse_instance(text, d);
        } catch (const Error &e) {
            return e.code();
        }
        return ErrorCode::IO;
    };
    CHECK(code_of("(objects a) (seed (Off a))") == ErrorCode::UNKNOWN_SYMBOL);
    CHECK(code_of("(objects a) (seed (On a zz))") == ErrorCode::UNKNOWN_SYMBOL);
    CHECK(code_of("(objects a) (seed (On a))") == ErrorCode::ARITY);
}

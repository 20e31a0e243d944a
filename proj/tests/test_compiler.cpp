#include <gtest/gtest.h>

#include "p2pdb/compiler.hpp"
#include "p2pdb/errors.hpp"
#include "p2pdb/fixpoint.hpp"
#include "p2pdb/oracle.hpp"
#include "p2pdb/syntax.hpp"
#include "support/fixtures.hpp"
#include "support/gen.hpp"

using namespace p2pdb;
using namespace p2pdb::testfx;

TEST(Compile, CitizenCopyRules) {
    auto sys = citizen();
    sys.rules.erase(sys.rules.begin());
    const auto program = compiler::compile_global_program(sys);
    EXPECT_EQ(program.idb.size(), 2u);
    EXPECT_EQ(compiler::export_program(program), "n1.Citizen-1(ann).\n"
                                                 "n1.Citizen-1(bob).\n"
                                                 "n3.Citizen-3(x) :- n2.Female-2(x).\n"
                                                 "n3.Citizen-3(x) :- n2.Male-2(x).\n");
}

TEST(Compile, RejectsOutsideFragment) {
    try {
        compiler::compile_global_program(citizen());
        FAIL();
    } catch (const FragmentError& e) {
        EXPECT_NE(std::string(e.what()).find("link r1"), std::string::npos);
    }
    EXPECT_THROW(compiler::compile_global_program(example1()), FragmentError);
    EXPECT_THROW(compiler::compile_global_program(parse_network("node 1 { clause A(a) | B(a). }")), FragmentError);
    EXPECT_THROW(compiler::compile_global_program(parse_network("node 1 { denial :- A(x). }")), FragmentError);
    EXPECT_THROW(compiler::compile_global_program(parse_network("node 1 {} node 2 {} link 1:P(x) => 2:R(x, z).")),
                 FragmentError);
}

TEST(Compile, EmptySystem) {
    const auto program = compiler::compile_global_program(P2PSystem{});
    EXPECT_TRUE(program.edb.empty());
    EXPECT_TRUE(program.idb.empty());
    EXPECT_EQ(compiler::export_program(program), "");
}

TEST(Compile, MultiConjunctBodyAndSplitPredicate) {
    const auto sys = parse_network(R"(
        node 1 { fact A(a, b). }
        node 2 { fact B(b). }
        node 3 { fact C(z0). }
        link 1:A(x, y) & 2:B(y) => 3:C(x) & 3:D(y).
    )");
    const auto program = compiler::compile_global_program(sys);
    EXPECT_EQ(compiler::export_program(program), "n1.A(a,b).\n"
                                                 "n2.B(b).\n"
                                                 "n3.C(v0) :- n3.C.edb(v0).\n"
                                                 "n3.C(x) :- n1.A(x,y), n2.B(y).\n"
                                                 "n3.C.edb(z0).\n"
                                                 "n3.D(y) :- n1.A(x,y), n2.B(y).\n");
    EXPECT_EQ(compiler::answer_via_global(sys, parse_query("3: C(x)")), unary({"a", "z0"}));
}

TEST(Seminaive, TransitiveClosure) {
    const auto sys = parse_network(R"(
        node 1 {
          fact E(a, b). fact E(b, c). fact E(c, d).
          rule T(x, y) :- E(x, y).
          rule T(x, z) :- T(x, y), E(y, z).
        }
    )");
    const auto program = compiler::compile_global_program(sys);
    const auto derived = compiler::seminaive_eval(program);
    EXPECT_EQ(derived.size(), 6u);
    EXPECT_EQ(derived, compiler::naive_eval(program));
}

TEST(Seminaive, SmallCases) {
    EXPECT_TRUE(compiler::seminaive_eval(compiler::compile_global_program(parse_network("node 1 { fact P(a). }"))).empty());
    const auto derived =
        compiler::seminaive_eval(compiler::compile_global_program(parse_network("node 1 { fact P(a). rule Q(x) :- P(x). }")));
    EXPECT_EQ(derived, (std::set<Atom>{Atom{"1", "Q", {c("a")}}}));
}

TEST(Global, ChainCopiesToSink) {
    std::string text = "node 1 { fact P(a). fact P(b). }";
    for (int k = 2; k <= 6; ++k) {
        text += " node " + std::to_string(k) + " {} link " + std::to_string(k - 1) + ":P(x) => " + std::to_string(k) +
                ":P(x).";
    }
    EXPECT_EQ(compiler::answer_via_global(parse_network(text), parse_query("6: P(x)")), unary({"a", "b"}));
}

TEST(Global, EquivalentToFixpointAndOracle) {
    testgen::Generator gen(401);
    int compared = 0;
    for (int i = 0; i < 200; ++i) {
        const auto sys = gen.system();
        const auto program = compiler::compile_global_program(sys);
        EXPECT_EQ(compiler::seminaive_eval(program), compiler::naive_eval(program));
        const auto state = fixpoint::tmin_fixpoint(sys);
        std::vector<Query> qs{gen.query(sys), gen.query(sys), gen.query(sys)};
        oracle::Config cfg;
        cfg.extra_predicates = oracle::signature_of(qs);
        const auto truth = oracle::tmdb_fixpoint(sys, cfg);
        for (const auto& q : qs) {
            const auto expected = oracle::oracle_certain_answer(truth, q).tuples;
            EXPECT_EQ(compiler::answer_via_global(sys, q), expected) << serialize(sys) << to_string(q);
            EXPECT_EQ(fixpoint::certain_answer(state, q), expected);
            ++compared;
        }
    }
    EXPECT_EQ(compared, 600);
}

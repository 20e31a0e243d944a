#include <gtest/gtest.h>

#include "p2pdb/errors.hpp"
#include "p2pdb/fixpoint.hpp"
#include "p2pdb/oracle.hpp"
#include "p2pdb/syntax.hpp"
#include "support/fixtures.hpp"
#include "support/gen.hpp"

using namespace p2pdb;
using namespace p2pdb::testfx;

namespace {

LocalTheory empty_theory(const NodeId& id) {
    LocalTheory t;
    t.node = id;
    return t;
}

bool includes(const oracle::InterpretationSet& big, const oracle::InterpretationSet& small) {
    return std::all_of(small.interps.begin(), small.interps.end(), [&](std::uint32_t m) {
        return std::find(big.interps.begin(), big.interps.end(), m) != big.interps.end();
    });
}

oracle::Config with_axiom(oracle::Mode mode, const std::string& axiom) {
    oracle::Config cfg;
    cfg.mode = mode;
    auto nf = parse_formula(axiom);
    cfg.extra_formulas[nf.node].push_back(nf.formula);
    return cfg;
}

} // namespace

TEST(Enumerate, Falsum) {
    auto t = empty_theory("1");
    t.falsum = true;
    t.facts.insert(Atom{"1", "P", {c("a")}});
    EXPECT_TRUE(oracle::enumerate_interpretations(t, domain({"a"}), {}).empty());
}

TEST(Enumerate, EmptyTheoryIsFullPowerset) {
    const auto all = oracle::enumerate_interpretations(empty_theory("1"), domain({"a"}), {}, {{{"1", "P"}, 1}});
    ASSERT_EQ(all.size(), 2u);
    std::set<std::set<Atom>> got;
    for (const auto& m : all) {
        got.insert(m.true_atoms);
    }
    EXPECT_EQ(got, (std::set<std::set<Atom>>{{}, {Atom{"1", "P", {c("a")}}}}));
}

TEST(Enumerate, GroundedExistentialNegation) {
    const oracle::Signature sig{{{"2", "Q"}, 1}, {{"2", "R"}, 1}};
    const auto dom = domain({"a", "b"});
    EXPECT_EQ(oracle::enumerate_interpretations(empty_theory("2"), dom, {}, sig).size(), 16u);
    const auto axiom = ground(parse_formula("2: exists x. !Q(x)").formula, dom);
    const auto kept = oracle::enumerate_interpretations(empty_theory("2"), dom, {axiom}, sig);
    EXPECT_EQ(kept.size(), 12u);
    for (const auto& m : kept) {
        EXPECT_FALSE(m.true_atoms.contains(Atom{"2", "Q", {c("a")}}) && m.true_atoms.contains(Atom{"2", "Q", {c("b")}}));
    }
}

TEST(Enumerate, UniverseCap) {
    const oracle::Signature sig{{{"1", "E"}, 2}};
    EXPECT_THROW(oracle::enumerate_interpretations(empty_theory("1"), domain({"a", "b", "c", "d"}), {}, sig),
                 CapExceeded);
}

TEST(TmdbStep, CitizenStepOne) {
    const auto sys = citizen();
    const auto m0 = oracle::initial_state(sys);
    const auto m1 = oracle::tmdb_step(m0, sys.rules);
    const auto& n2 = m1.nodes.at("2");
    EXPECT_LT(n2.interps.size(), m0.nodes.at("2").interps.size());
    for (auto m : n2.interps) {
        for (const char* who : {"ann", "bob"}) {
            EXPECT_TRUE(n2.holds(m, Atom{"2", "Male-2", {c(who)}}) || n2.holds(m, Atom{"2", "Female-2", {c(who)}}));
        }
    }
    EXPECT_EQ(m1.nodes.at("3"), m0.nodes.at("3"));
}

TEST(TmdbStep, NoRulesIsIdentity) {
    const auto sys = parse_network("node 1 { fact P(a). clause Q(a) | Q(b). }");
    const auto m0 = oracle::initial_state(sys);
    EXPECT_EQ(oracle::tmdb_step(m0, {}), m0);
    EXPECT_EQ(oracle::tmdb_fixpoint(sys), m0);
}

TEST(TmdbStep, Example1VacuousBody) {
    const auto sys = parse_network("node 1 { fact P(a). fact P(b). inconsistent. } node 2 { rule R(x) :- Q(x), S(x). } "
                                   "link 1:P(x) => 2:Q(x).");
    const auto m1 = oracle::tmdb_step(oracle::initial_state(sys), sys.rules);
    const auto& n2 = m1.nodes.at("2");
    ASSERT_FALSE(n2.empty());
    for (auto m : n2.interps) {
        EXPECT_TRUE(n2.holds(m, Atom{"2", "Q", {c("a")}}));
        EXPECT_TRUE(n2.holds(m, Atom{"2", "Q", {c("b")}}));
    }
}

TEST(TmdbFixpoint, CitizenKeepsEmptyInterpretationAtNode3) {
    const auto state = oracle::tmdb_fixpoint(citizen());
    const auto& n3 = state.nodes.at("3");
    EXPECT_NE(std::find(n3.interps.begin(), n3.interps.end(), 0u), n3.interps.end());
    EXPECT_TRUE(oracle::oracle_certain_answer(state, parse_query("3: Citizen-3(x)")).tuples.empty());
    EXPECT_EQ(oracle::oracle_certain_answer(state, parse_query("2: Male-2(x) | Female-2(x)")).tuples,
              unary({"ann", "bob"}));
}

TEST(TmdbFixpoint, Example1Modes) {
    const auto sys = example1();
    const auto ext = oracle::tmdb_fixpoint(sys);
    EXPECT_EQ(oracle::oracle_certain_answer(ext, parse_query("2: Q(x)")).tuples, unary({"a"}));
    EXPECT_TRUE(oracle::oracle_certain_answer(ext, parse_query("2: R(x)")).tuples.empty());

    const auto local = oracle::tmdb_fixpoint(sys, with_axiom(oracle::Mode::local, "2: exists x. !Q(x)"));
    EXPECT_TRUE(local.no_model);
    for (const char* q : {"2: Q(x)", "2: R(x)", "1: P(x)"}) {
        const auto ans = oracle::oracle_certain_answer(local, parse_query(q));
        EXPECT_TRUE(ans.all);
        EXPECT_EQ(ans.tuples, unary({"a"}));
    }
    EXPECT_EQ(oracle::oracle_certain_answer(local, parse_query("2: [x, y] Q(x) & R(y)")).tuples.size(), 1u);
}

TEST(TmdbFixpoint, LocalModeInconsistentNodeGivesAllTuples) {
    const auto sys = parse_network("node 1 { fact P(a). inconsistent. } node 2 { fact S(b). }");
    oracle::Config cfg;
    cfg.mode = oracle::Mode::local;
    const auto state = oracle::tmdb_fixpoint(sys, cfg);
    const auto ans = oracle::oracle_certain_answer(state, parse_query("2: S(x)"));
    EXPECT_TRUE(ans.all);
    EXPECT_EQ(ans.tuples, unary({"a", "b"}));
    EXPECT_EQ(oracle::oracle_certain_answer(oracle::tmdb_fixpoint(sys), parse_query("2: S(x)")).tuples, unary({"b"}));
}

TEST(GlobalModel, Checks) {
    const auto sys = citizen();
    EXPECT_TRUE(oracle::check_global_model(oracle::tmdb_fixpoint(sys), sys));
    EXPECT_FALSE(oracle::check_global_model(oracle::initial_state(sys), sys));
    auto empty = oracle::initial_state(sys);
    for (auto& [_, set] : empty.nodes) {
        set.interps.clear();
    }
    EXPECT_TRUE(oracle::check_global_model(empty, sys));
}

TEST(Invariants, StepShrinksAndPreservesInclusion) {
    testgen::Generator gen(301, testgen::disjunctive());
    int checked = 0;
    for (int i = 0; i < 120; ++i) {
        const auto sys = gen.system();
        oracle::OracleState a;
        try {
            a = oracle::initial_state(sys);
        } catch (const CapExceeded&) {
            continue;
        }
        auto b = a;
        for (auto& [_, set] : b.nodes) {
            std::erase_if(set.interps, [&](std::uint32_t) { return gen.rng()() % 3 == 0; });
        }
        const auto sa = oracle::tmdb_step(a, sys.rules);
        const auto sb = oracle::tmdb_step(b, sys.rules);
        for (const auto& [id, set] : sa.nodes) {
            EXPECT_TRUE(includes(a.nodes.at(id), set));
            EXPECT_TRUE(includes(set, sb.nodes.at(id)));
        }
        ++checked;
    }
    EXPECT_GT(checked, 60);
}

TEST(Invariants, LocalEqualsExtendedWhenConsistentAndFixpointIsModel) {
    testgen::Generator gen(302, testgen::disjunctive());
    int compared = 0;
    for (int i = 0; i < 150; ++i) {
        const auto sys = gen.system();
        std::vector<Query> qs{gen.query(sys), gen.query(sys), gen.query(sys)};
        oracle::Config ext;
        ext.extra_predicates = oracle::signature_of(qs);
        oracle::OracleState e;
        try {
            e = oracle::tmdb_fixpoint(sys, ext);
        } catch (const CapExceeded&) {
            continue;
        }
        EXPECT_TRUE(oracle::check_global_model(e, sys)) << serialize(sys);
        if (std::any_of(e.nodes.begin(), e.nodes.end(), [](const auto& kv) { return kv.second.empty(); })) {
            continue;
        }
        auto loc_cfg = ext;
        loc_cfg.mode = oracle::Mode::local;
        const auto l = oracle::tmdb_fixpoint(sys, loc_cfg);
        EXPECT_FALSE(l.no_model);
        for (const auto& q : qs) {
            EXPECT_EQ(oracle::oracle_certain_answer(l, q).tuples, oracle::oracle_certain_answer(e, q).tuples);
            ++compared;
        }
    }
    EXPECT_GT(compared, 150);
}

TEST(Invariants, DomainIndependence) {
    auto opts = testgen::disjunctive();
    opts.constants = 1;
    testgen::Generator gen(303, opts);
    int compared = 0;
    for (int i = 0; i < 100; ++i) {
        const auto sys = gen.system();
        std::vector<Query> qs{gen.query(sys), gen.query(sys)};
        oracle::Config base;
        base.extra_predicates = oracle::signature_of(qs);
        auto wider = base;
        wider.extra_domain = 1;
        try {
            const auto s0 = oracle::tmdb_fixpoint(sys, base);
            const auto s1 = oracle::tmdb_fixpoint(sys, wider);
            for (const auto& q : qs) {
                EXPECT_EQ(oracle::oracle_certain_answer(s0, q).tuples, oracle::oracle_certain_answer(s1, q).tuples)
                    << serialize(sys) << to_string(q);
                ++compared;
            }
        } catch (const CapExceeded&) {
        }
    }
    EXPECT_GT(compared, 100);
}

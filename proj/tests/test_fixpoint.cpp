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

const CoordinationRule& rule_with_head(const P2PSystem& sys, const std::string& pred) {
    for (const auto& r : sys.rules) {
        if (r.head[0].predicate == pred && r.body[0].atoms[0].predicate != "Citizen-1") {
            return r;
        }
    }
    throw std::runtime_error("no rule");
}

AnswerSet answer(const P2PSystem& sys, const std::string& q, const fixpoint::Options& opts = {}) {
    return fixpoint::certain_answer(fixpoint::tmin_fixpoint(sys, opts), parse_query(q));
}

} // namespace

TEST(CertainBody, CitizenMaleRuleTransfersNothing) {
    const auto sys = citizen();
    const auto state = fixpoint::tmin_fixpoint(sys);
    EXPECT_TRUE(fixpoint::certain_body(state, *sys.find_rule("r2")).empty());
    EXPECT_TRUE(fixpoint::certain_body(state, *sys.find_rule("r3")).empty());
}

TEST(CertainBody, InconsistentSourceIsVacuous) {
    const auto sys = parse_network("node 1 { fact P(a). fact P(b). inconsistent. } node 2 {} link 1:P(x) => 2:Q(x).");
    const auto state = fixpoint::initial_state(sys);
    EXPECT_EQ(fixpoint::certain_body(state, sys.rules[0]), unary({"a", "b"}));
}

TEST(CertainBody, JoinAcrossConjuncts) {
    const auto sys = parse_network(R"(
        node 1 { fact A(a). fact A(b). }
        node 2 { fact B(b). fact B(c). }
        node 3 {}
        link 1:A(x) & 2:B(x) => 3:C(x).
    )");
    EXPECT_EQ(fixpoint::certain_body(fixpoint::initial_state(sys), sys.rules[0]), unary({"b"}));
}

TEST(ApplyHead, ThreeHeadForms) {
    const auto sys = parse_network(R"(
        node 1 {} node 2 {}
        link @d 1:Citizen-1(x) => 2:Male-2(x) | 2:Female-2(x).
        link @c 1:Citizen-1(x) => 2:Citizen-3(x).
        link @e 1:Citizen-1(x) => 2:R(x, z).
    )");
    LocalTheory t;
    t.node = "2";
    EXPECT_TRUE(fixpoint::apply_head(t, *sys.find_rule("d"), {c("ann")}));
    ASSERT_EQ(t.clauses.size(), 1u);
    EXPECT_EQ(to_string(*t.clauses.begin()), "2:Female-2(ann) | 2:Male-2(ann)");
    EXPECT_FALSE(fixpoint::apply_head(t, *sys.find_rule("d"), {c("ann")}));
    EXPECT_TRUE(fixpoint::apply_head(t, *sys.find_rule("c"), {c("ann")}));
    EXPECT_TRUE(t.facts.contains(Atom{"2", "Citizen-3", {c("ann")}}));
    EXPECT_TRUE(fixpoint::apply_head(t, *sys.find_rule("e"), {c("a")}));
    const Term nu = fixpoint::labeled_null(*sys.find_rule("e"), {c("a")}, "z");
    EXPECT_TRUE(nu.is_null());
    EXPECT_TRUE(t.facts.contains(Atom{"2", "R", {c("a"), nu}}));
    EXPECT_FALSE(fixpoint::apply_head(t, *sys.find_rule("e"), {c("a")}));
    EXPECT_NE(nu, fixpoint::labeled_null(*sys.find_rule("e"), {c("b")}, "z"));
}

TEST(ApplyHead, FactSubsumesDisjunctiveHead) {
    const auto sys = parse_network("node 1 {} node 2 {} link 1:P(x) => 2:A(x) | 2:B(x).");
    LocalTheory t;
    t.node = "2";
    t.add_fact(Atom{"2", "A", {c("a")}});
    EXPECT_FALSE(fixpoint::apply_head(t, sys.rules[0], {c("a")}));
    EXPECT_TRUE(t.clauses.empty());
}

TEST(Tmin, CitizenExample) {
    const auto sys = citizen();
    const auto state = fixpoint::tmin_fixpoint(sys);
    EXPECT_EQ(state.node("2").theory.clauses.size(), 2u);
    EXPECT_TRUE(state.node("2").theory.facts.empty());
    EXPECT_EQ(state.node("3").theory, sys.nodes.at("3"));
    EXPECT_TRUE(fixpoint::certain_answer(state, parse_query("3: Citizen-3(x)")).empty());
    EXPECT_EQ(fixpoint::certain_answer(state, parse_query("2: Male-2(x) | Female-2(x)")), unary({"ann", "bob"}));
    EXPECT_TRUE(fixpoint::certain_answer(state, parse_query("2: Male-2(x)")).empty());
}

TEST(Tmin, Example1) {
    const auto sys = example1();
    const auto state = fixpoint::tmin_fixpoint(sys);
    EXPECT_FALSE(state.node("1").status.is_consistent());
    EXPECT_TRUE(state.node("2").status.is_consistent());
    EXPECT_EQ(fixpoint::certain_answer(state, parse_query("2: Q(x)")), unary({"a"}));
    EXPECT_TRUE(fixpoint::certain_answer(state, parse_query("2: R(x)")).empty());

    fixpoint::Options wider;
    wider.extra_constants = domain({"b"});
    EXPECT_EQ(answer(sys, "2: Q(x)", wider), unary({"a", "b"}));
}

TEST(Tmin, NoRulesIsStepZero) {
    const auto sys = parse_network("node 1 { fact P(a). rule Q(x) :- P(x). } node 2 { clause A(b) | B(b). }");
    const auto state = fixpoint::tmin_fixpoint(sys);
    EXPECT_EQ(state.iterations, 0u);
    EXPECT_TRUE(state.trace.empty());
    for (const auto& [id, t] : sys.nodes) {
        EXPECT_EQ(state.node(id).theory, t);
    }
}

TEST(Tmin, InconsistentNodeAnswersAllTuples) {
    const auto sys = parse_network("node 1 { fact P(a). fact P(b). inconsistent. }");
    EXPECT_EQ(answer(sys, "1: R(x, y)").size(), 4u);
}

TEST(Tmin, ExistentialOnCycleRejected) {
    const auto sys = parse_network("node 1 {} node 2 {} link 1:P(x) => 2:R(x, z). link 2:R(x, y) => 1:P(x).");
    EXPECT_THROW(fixpoint::tmin_fixpoint(sys), FragmentError);
}

TEST(Tmin, NullsStayAtTheirNode) {
    const auto sys = parse_network(R"(
        node 1 { fact P(a). }
        node 2 { rule S(y) :- R(x, y). }
        node 3 {}
        link 1:P(x) => 2:R(x, z).
        link 2:R(x, y) => 3:R(x, y).
        link 2:R(x, y) => 3:T(x).
    )");
    const auto state = fixpoint::tmin_fixpoint(sys);
    EXPECT_EQ(fixpoint::certain_answer(state, parse_query("2: [x] R(x, y)")), unary({"a"}));
    EXPECT_TRUE(fixpoint::certain_answer(state, parse_query("2: [y] R(x, y)")).empty());
    EXPECT_EQ(fixpoint::certain_answer(state, parse_query("2: [] S(y)")).size(), 1u);
    EXPECT_TRUE(fixpoint::certain_answer(state, parse_query("3: [] R(x, y)")).empty());
    EXPECT_EQ(fixpoint::certain_answer(state, parse_query("3: T(x)")), unary({"a"}));
}

TEST(Tmin, TraceExportSortedByIteration) {
    std::string text = "node 1 { fact P(a). }";
    for (int k = 2; k <= 12; ++k) {
        text += " node " + std::to_string(k) + " {} link " + std::to_string(k - 1) + ":P(x) => " + std::to_string(k) +
                ":P(x).";
    }
    const auto state = fixpoint::tmin_fixpoint(parse_network(text));
    EXPECT_EQ(state.iterations, 11u);
    const auto trace = fixpoint::export_trace(state);
    EXPECT_EQ(trace.substr(0, trace.find('\n')), "iter=1 rule=r1 head=2:P(a)");
    EXPECT_NE(trace.find("iter=9 rule=r9 head=10:P(a)\niter=10 rule=r10"), std::string::npos);
}

TEST(Invariants, MonotoneUnderAddedFacts) {
    testgen::Generator gen(1001, testgen::disjunctive());
    for (int i = 0; i < 150; ++i) {
        const auto a = gen.system();
        const auto b = gen.grow(a);
        fixpoint::Options opts;
        opts.extra_constants = active_domain(b);
        const auto sa = fixpoint::tmin_fixpoint(a, opts);
        const auto sb = fixpoint::tmin_fixpoint(b, opts);
        for (const auto& r : a.rules) {
            const auto ra = fixpoint::certain_body(sa, r);
            const auto rb = fixpoint::certain_body(sb, r);
            EXPECT_TRUE(std::includes(rb.begin(), rb.end(), ra.begin(), ra.end()));
        }
        for (int k = 0; k < 3; ++k) {
            const auto q = gen.query(a);
            const auto qa = fixpoint::certain_answer(sa, q);
            const auto qb = fixpoint::certain_answer(sb, q);
            EXPECT_TRUE(std::includes(qb.begin(), qb.end(), qa.begin(), qa.end())) << serialize(b) << to_string(q);
        }
    }
}

TEST(Invariants, PersistenceAndSoundness) {
    testgen::Generator gen(1002, testgen::disjunctive());
    for (int i = 0; i < 150; ++i) {
        const auto sys = gen.system();
        const auto state = fixpoint::tmin_fixpoint(sys);
        for (const auto& f : state.trace) {
            EXPECT_TRUE(fixpoint::certain_body(state, *sys.find_rule(f.rule_id)).contains(f.assignment));
        }
        for (const auto& r : sys.rules) {
            LocalTheory t = state.node(r.target).theory;
            for (const auto& a : fixpoint::certain_body(state, r)) {
                EXPECT_FALSE(fixpoint::apply_head(t, r, a)) << serialize(sys);
            }
        }
        for (const auto& [id, ns] : state.nodes) {
            EXPECT_EQ(ns.status, nodekb::minimal_models(ns.theory));
            if (!fixpoint::initial_state(sys).node(id).status.is_consistent()) {
                EXPECT_FALSE(ns.status.is_consistent());
            }
        }
    }
}

TEST(Invariants, OrderIndependence) {
    testgen::Generator gen(1003, testgen::disjunctive());
    for (int i = 0; i < 100; ++i) {
        const auto sys = gen.system();
        const auto base = fixpoint::tmin_fixpoint(sys);
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            fixpoint::Options opts;
            opts.shuffle_seed = seed;
            const auto shuffled = fixpoint::tmin_fixpoint(sys, opts);
            EXPECT_TRUE(fixpoint::same_knowledge(base, shuffled));
            EXPECT_EQ(fixpoint::export_trace(base), fixpoint::export_trace(shuffled));
        }
    }
}

TEST(Invariants, InconsistencyIsolation) {
    testgen::GenOptions opts = testgen::disjunctive();
    opts.falsum = 30;
    testgen::Generator gen(1004, opts);
    int compared = 0;
    for (int i = 0; i < 200; ++i) {
        const auto sys = gen.system();
        const auto state = fixpoint::tmin_fixpoint(sys);
        const auto graph = dependency_graph(sys);
        for (const auto& [bad, ns] : state.nodes) {
            if (ns.status.is_consistent()) {
                continue;
            }
            P2PSystem isolated = sys;
            isolated.nodes.at(bad) = LocalTheory{bad, {}, {}, {}, {}, false};
            std::erase_if(isolated.rules, [&](const CoordinationRule& r) {
                return r.target == bad ||
                       std::any_of(r.body.begin(), r.body.end(), [&](const BodyConjunct& c) { return c.source == bad; });
            });
            fixpoint::Options same_domain;
            same_domain.extra_constants = active_domain(sys);
            const auto after = fixpoint::tmin_fixpoint(isolated, same_domain);
            const auto reach = graph.reachable_from(bad);
            for (int k = 0; k < 4; ++k) {
                const auto q = gen.query(sys);
                if (reach.contains(q.node)) {
                    continue;
                }
                EXPECT_EQ(fixpoint::certain_answer(state, q), fixpoint::certain_answer(after, q))
                    << serialize(sys) << to_string(q);
                ++compared;
            }
        }
    }
    EXPECT_GT(compared, 50);
}

namespace {

void expect_oracle_agreement(const testgen::GenOptions& opts, std::uint64_t seed, int systems, std::size_t extra_domain,
                             int minimum) {
    testgen::Generator gen(seed, opts);
    int compared = 0;
    for (int i = 0; i < systems; ++i) {
        const auto sys = gen.system();
        std::vector<Query> queries;
        for (int k = 0; k < 3; ++k) {
            queries.push_back(gen.query(sys));
        }
        oracle::Config cfg;
        cfg.extra_domain = extra_domain;
        cfg.extra_predicates = oracle::signature_of(queries);
        oracle::OracleState truth;
        try {
            truth = oracle::tmdb_fixpoint(sys, cfg);
        } catch (const CapExceeded&) {
            continue;
        }
        const auto state = fixpoint::tmin_fixpoint(sys);
        for (const auto& q : queries) {
            EXPECT_EQ(fixpoint::certain_answer(state, q), oracle::oracle_certain_answer(truth, q).tuples)
                << serialize(sys) << to_string(q);
            ++compared;
        }
    }
    EXPECT_GE(compared, minimum);
}

} // namespace

TEST(OracleAgreement, DisjunctiveSystems) { expect_oracle_agreement(testgen::disjunctive(), 1005, 150, 0, 300); }

TEST(OracleAgreement, DisjunctiveSystemsWithFreshElement) {
    auto opts = testgen::disjunctive();
    opts.constants = 1;
    expect_oracle_agreement(opts, 1006, 100, 1, 200);
}

TEST(OracleAgreement, ExistentialHeads) { expect_oracle_agreement(testgen::existential(), 1007, 150, 1, 300); }

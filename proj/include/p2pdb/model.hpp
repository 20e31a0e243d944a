#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace p2pdb {

using NodeId = std::string;

/// A constant, a variable, or a labeled null introduced by the chase.
/// Constants denote themselves: equal names are the same object.
struct Term {
    enum class Kind : unsigned char { constant, variable, null };

    Kind kind = Kind::constant;
    std::string name;

    static Term constant(std::string n) { return {Kind::constant, std::move(n)}; }
    static Term variable(std::string n) { return {Kind::variable, std::move(n)}; }
    static Term null(std::string n) { return {Kind::null, std::move(n)}; }

    bool is_constant() const noexcept { return kind == Kind::constant; }
    bool is_variable() const noexcept { return kind == Kind::variable; }
    bool is_null() const noexcept { return kind == Kind::null; }
    bool is_ground() const noexcept { return kind != Kind::variable; }

    auto operator<=>(const Term&) const = default;
    bool operator==(const Term&) const = default;
};

using Tuple = std::vector<Term>;

/// Predicate identity: the same name at two nodes is two predicates.
struct PredicateKey {
    NodeId node;
    std::string name;

    auto operator<=>(const PredicateKey&) const = default;
    bool operator==(const PredicateKey&) const = default;
};

struct Atom {
    NodeId node;
    std::string predicate;
    std::vector<Term> args;

    std::size_t arity() const noexcept { return args.size(); }
    PredicateKey key() const { return {node, predicate}; }
    bool is_ground() const;

    auto operator<=>(const Atom&) const = default;
    bool operator==(const Atom&) const = default;
};

using Conjunction = std::vector<Atom>;

struct DefiniteRule {
    Atom head;
    Conjunction body;

    auto operator<=>(const DefiniteRule&) const = default;
    bool operator==(const DefiniteRule&) const = default;
};

/// Positive ground clause: at least one atom must hold.
struct Clause {
    std::set<Atom> atoms;

    auto operator<=>(const Clause&) const = default;
    bool operator==(const Clause&) const = default;
};

/// Denial constraint `:- body`: the body must never be satisfied.
struct Denial {
    Conjunction body;

    auto operator<=>(const Denial&) const = default;
    bool operator==(const Denial&) const = default;
};

struct LocalTheory {
    NodeId node;
    std::set<Atom> facts;
    std::vector<DefiniteRule> rules;
    std::set<Clause> clauses;
    std::vector<Denial> denials;
    bool falsum = false;

    bool is_definite() const noexcept { return clauses.empty() && denials.empty() && !falsum; }

    /// Adds a ground fact and drops clauses it subsumes. Returns false if already present.
    bool add_fact(const Atom& fact);
    /// Adds a ground clause unless a fact or an existing clause subsumes it.
    /// A one-atom clause is added as a fact. Returns false if nothing changed.
    bool add_clause(Clause clause);

    bool operator==(const LocalTheory&) const = default;
};

/// One conjunct of a coordination rule body: a conjunctive query at one source node.
struct BodyConjunct {
    NodeId source;
    Conjunction atoms;

    bool operator==(const BodyConjunct&) const = default;
};

enum class HeadKind : unsigned char { conjunctive, disjunctive, existential };

/// `j1:b1 & ... & jk:bk => i:h`. Heads are a conjunction of atoms (datalog form),
/// a disjunction of atoms, or a conjunction with variables absent from the body.
struct CoordinationRule {
    std::string id;
    std::vector<BodyConjunct> body;
    NodeId target;
    HeadKind head_kind = HeadKind::conjunctive;
    std::vector<Atom> head;

    /// Variables shared with the head or between conjuncts, in order of first appearance.
    std::vector<std::string> distinguished_vars() const;
    /// Distinguished variables occurring in conjunct `index`, in distinguished order.
    std::vector<std::string> conjunct_vars(std::size_t index) const;
    /// Head variables that do not occur in the body.
    std::vector<std::string> existential_vars() const;

    bool operator==(const CoordinationRule&) const = default;
};

struct P2PSystem {
    std::map<NodeId, LocalTheory> nodes;
    std::vector<CoordinationRule> rules;

    const CoordinationRule* find_rule(const std::string& id) const;

    bool operator==(const P2PSystem&) const = default;
};

/// A union of conjunctive queries posed at one node. Every disjunct must
/// bind every answer variable.
struct Query {
    NodeId node;
    std::vector<std::string> answer_vars;
    std::vector<Conjunction> disjuncts;

    std::size_t arity() const noexcept { return answer_vars.size(); }
    bool operator==(const Query&) const = default;
};

using AnswerSet = std::set<Tuple>;

struct Violation {
    std::string element;
    std::string invariant;

    bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate(const P2PSystem& system);
std::vector<Violation> validate(const Query& query);

struct DependencyGraph {
    std::set<NodeId> nodes;
    std::set<std::pair<NodeId, NodeId>> edges;
    bool acyclic = true;

    std::vector<NodeId> successors(const NodeId& node) const;
    /// Kahn order, ties broken by smallest node id. Empty optional if cyclic.
    std::optional<std::vector<NodeId>> topological_order() const;
    /// Nodes reachable from `start` along edges, including `start`.
    std::set<NodeId> reachable_from(const NodeId& start) const;
};

DependencyGraph dependency_graph(const P2PSystem& system);

/// Constants occurring anywhere in the system, sorted.
std::vector<Term> active_domain(const P2PSystem& system);

bool has_existential_heads(const P2PSystem& system);

std::string to_string(const Term& term);
std::string to_string(const Atom& atom);
std::string to_string(const Tuple& tuple);
std::string to_string(const Clause& clause);
std::string to_string(const Query& query);

/// Variable names of `atoms` in order of first appearance.
std::vector<std::string> variables_of(const Conjunction& atoms);

} // namespace p2pdb

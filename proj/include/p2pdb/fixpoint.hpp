#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "p2pdb/model.hpp"
#include "p2pdb/nodekb.hpp"

namespace p2pdb::fixpoint {

struct NodeState {
    LocalTheory theory;
    nodekb::NodeStatus status;

    bool operator==(const NodeState&) const = default;
};

/// First firing of a ground rule instance.
struct Firing {
    std::size_t iteration = 0;
    std::string rule_id;
    Tuple assignment;
    std::string head;

    bool operator==(const Firing&) const = default;
};

struct SystemState {
    std::map<NodeId, NodeState> nodes;
    /// Constants over which vacuous (inconsistent-source) bodies range.
    std::vector<Term> domain;
    std::vector<Firing> trace;
    std::size_t iterations = 0;

    const NodeState& node(const NodeId& id) const;
};

struct Options {
    nodekb::Options kb;
    /// Added to the active domain.
    std::vector<Term> extra_constants;
    /// Process rules in a seeded shuffled order within each iteration.
    std::optional<std::uint64_t> shuffle_seed;
};

/// Original theories with their statuses computed.
SystemState initial_state(const P2PSystem& system, const Options& options = {});

/// Certain tuples over `conjunct_vars(index)` of one body conjunct at a source
/// node with status `source`. Tuples with labeled nulls are dropped: a null
/// names a different witness in different models, so it is never certain.
std::set<Tuple> certain_conjunct(const nodekb::NodeStatus& source, const CoordinationRule& rule, std::size_t index,
                                 const std::vector<Term>& domain);

/// Assignments to the rule's distinguished variables (in `distinguished_vars()`
/// order) under which every body conjunct is certain at its source node. A
/// conjunct at an inconsistent node holds for every tuple over the domain.
std::set<Tuple> certain_body(const SystemState& state, const CoordinationRule& rule);

/// Natural join of per-conjunct relations (each over `conjunct_vars(l)`),
/// projected on the distinguished variables.
std::set<Tuple> join_body(const CoordinationRule& rule, const std::vector<std::set<Tuple>>& conjunct_relations);

/// Adds the instantiated head to `theory`: facts for conjunctive heads, a clause
/// for disjunctive heads, facts with fresh labeled nulls for existential heads.
/// Returns true if the theory changed. Does not recompute any status.
bool apply_head(LocalTheory& theory, const CoordinationRule& rule, const Tuple& assignment);

/// The labeled null standing for existential variable `var` of `rule` under `assignment`.
Term labeled_null(const CoordinationRule& rule, const Tuple& assignment, const std::string& var);

/// Ground head formula text, e.g. `2:Male-2(ann) | 2:Female-2(ann)`.
std::string head_text(const CoordinationRule& rule, const Tuple& assignment);

/// Throws FragmentError when existential heads occur in a cyclic system.
void check_termination_fragment(const P2PSystem& system);

/// Fires all rules against the previous state, merges the heads, and repeats
/// until no theory changes.
SystemState tmin_fixpoint(const P2PSystem& system, const Options& options = {});

/// Certain constant answers of a positive query at its node.
AnswerSet certain_answer(const SystemState& state, const Query& query);

/// `iter=<n> rule=<id> head=<ground formula>`, one line per firing, sorted.
std::string export_trace(const SystemState& state);

/// True iff both states hold the same theories and statuses per node.
bool same_knowledge(const SystemState& a, const SystemState& b);

} // namespace p2pdb::fixpoint

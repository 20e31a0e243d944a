#pragma once

#include <cstddef>
#include <set>
#include <vector>

#include "p2pdb/model.hpp"

namespace p2pdb::nodekb {

struct HerbrandInterpretation {
    NodeId node;
    std::set<Atom> true_atoms;

    auto operator<=>(const HerbrandInterpretation&) const = default;
    bool operator==(const HerbrandInterpretation&) const = default;
};

/// Either the (non-empty, canonically sorted) set of minimal models, or
/// inconsistent, the empty model set.
class NodeStatus {
public:
    static NodeStatus inconsistent() { return NodeStatus{}; }
    static NodeStatus consistent(std::vector<HerbrandInterpretation> minimal_models);

    bool is_consistent() const noexcept { return !models_.empty(); }
    const std::vector<HerbrandInterpretation>& models() const noexcept { return models_; }

    bool operator==(const NodeStatus&) const = default;

private:
    std::vector<HerbrandInterpretation> models_;
};

struct Options {
    std::size_t branching_cap = 20;
};

/// Subset-minimal Herbrand models of the theory: closed under its definite
/// rules, satisfying every clause, violating no denial. Throws CapExceeded if
/// the theory has more clauses than the cap.
NodeStatus minimal_models(const LocalTheory& theory, const Options& options = {});

/// Tuples (constants or labeled nulls) in the answer of `query` in every model.
/// On an inconsistent status every tuple over `domain` is certain.
std::set<Tuple> certain_relation(const NodeStatus& status, const Query& query, const std::vector<Term>& domain);

/// Constant tuples certainly in the answer of `query`.
AnswerSet certain_answers_local(const NodeStatus& status, const Query& query, const std::vector<Term>& domain);

/// Answer of a union of conjunctive queries in a single interpretation.
std::set<Tuple> answers_in(const HerbrandInterpretation& model, const Query& query);

/// Direct model check against facts, rules, clauses, denials and falsum.
bool satisfies(const HerbrandInterpretation& model, const LocalTheory& theory);

/// All tuples of length `arity` over `domain`, in lexicographic order.
std::set<Tuple> all_tuples(const std::vector<Term>& domain, std::size_t arity);

} // namespace p2pdb::nodekb

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "p2pdb/formula.hpp"
#include "p2pdb/model.hpp"
#include "p2pdb/nodekb.hpp"

// Definition-level evaluation over explicitly enumerated interpretation sets.
// Everything here is brute force over a tiny finite domain and deliberately
// shares no evaluation code with the engines it is used to check.
namespace p2pdb::oracle {

enum class Mode { local, extended };

using Signature = std::map<PredicateKey, std::size_t>;

struct Config {
    Mode mode = Mode::extended;
    /// Fresh domain elements appearing nowhere in the system.
    std::size_t extra_domain = 0;
    /// Additional axioms per node; quantifiers are grounded over the domain.
    std::map<NodeId, std::vector<Formula>> extra_formulas;
    /// Predicates that must be part of the atom universe (e.g. those of queries).
    Signature extra_predicates;
    std::size_t universe_cap = 14;
};

/// Interpretations of one node as bitmasks over its ground-atom universe.
struct InterpretationSet {
    NodeId node;
    std::vector<Atom> universe;
    std::vector<std::uint32_t> interps;

    bool empty() const noexcept { return interps.empty(); }
    bool holds(std::uint32_t interp, const Atom& atom) const;
    nodekb::HerbrandInterpretation decode(std::uint32_t interp) const;

    bool operator==(const InterpretationSet&) const = default;
};

struct OracleState {
    Mode mode = Mode::extended;
    /// Answer constants C, sorted.
    std::vector<Term> constants;
    /// C plus fresh elements.
    std::vector<Term> domain;
    std::map<NodeId, InterpretationSet> nodes;
    std::map<NodeId, std::vector<Formula>> ground_formulas;
    /// Local mode only: some node set became empty, so the system has no model.
    bool no_model = false;

    bool operator==(const OracleState&) const = default;
};

struct Answer {
    /// Set when no model exists (local mode): every tuple is an answer.
    bool all = false;
    AnswerSet tuples;
};

/// Every Herbrand interpretation over the node's atom universe that satisfies
/// the theory and the ground `extra_formulas`. The universe covers the
/// predicates of the theory, of the formulas, and `extra_predicates`, grounded
/// over `domain`. Throws CapExceeded ("universe-too-large") above `cap` atoms.
std::vector<nodekb::HerbrandInterpretation> enumerate_interpretations(
    const LocalTheory& theory, const std::vector<Term>& domain, const std::vector<Formula>& extra_formulas,
    const Signature& extra_predicates = {}, std::size_t cap = 14);

/// M_0: per node, all interpretations satisfying the local theory.
OracleState initial_state(const P2PSystem& system, const Config& config = {});

/// One synchronous application of the immediate consequence operator: for
/// every rule and assignment whose body holds in every interpretation of each
/// source set, keep only the head-node interpretations satisfying the head.
OracleState tmdb_step(const OracleState& state, const std::vector<CoordinationRule>& rules);

OracleState tmdb_fixpoint(const P2PSystem& system, const Config& config = {});

Answer oracle_certain_answer(const OracleState& state, const Query& query);

/// True iff every interpretation satisfies its node theory (and extra axioms)
/// and every rule's implication holds for every assignment over the domain.
bool check_global_model(const OracleState& state, const P2PSystem& system);

/// Predicates of the queries, for Config::extra_predicates.
Signature signature_of(const std::vector<Query>& queries);

} // namespace p2pdb::oracle

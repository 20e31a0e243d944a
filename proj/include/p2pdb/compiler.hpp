#pragma once

#include <set>
#include <string>
#include <vector>

#include "p2pdb/model.hpp"

namespace p2pdb::compiler {

/// Suffix of the extensional copy of a predicate that is also derived.
inline constexpr const char* edb_suffix = ".edb";

/// A single Datalog program over node-qualified predicates.
struct DatalogProgram {
    std::set<Atom> edb;
    std::vector<DefiniteRule> idb;
};

/// Throws FragmentError unless the system is Datalog-p2p: no clauses, denials
/// or falsum at any node, and only conjunctive link heads.
void require_datalog_p2p(const P2PSystem& system);

/// Union of all local definite rules, one rule per link head atom (body = all
/// conjunct atoms), and the node facts as EDB. A predicate that has facts and
/// is also a rule head keeps its facts under `<pred>.edb` plus a copy rule.
DatalogProgram compile_global_program(const P2PSystem& system);

/// Least-model atoms derived by the rules (EDB atoms excluded), delta-driven.
std::set<Atom> seminaive_eval(const DatalogProgram& program);

/// Same least model computed by naive iteration; reference for seminaive_eval.
std::set<Atom> naive_eval(const DatalogProgram& program);

/// Certain answers of `query` over EDB plus derived atoms.
AnswerSet answer_via_global(const P2PSystem& system, const Query& query);

/// One line per EDB fact and rule, `n<node>.<pred>(args)`, sorted.
std::string export_program(const DatalogProgram& program);

} // namespace p2pdb::compiler

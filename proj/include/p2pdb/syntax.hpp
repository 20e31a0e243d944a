#pragma once

#include <string>
#include <string_view>

#include "p2pdb/formula.hpp"
#include "p2pdb/model.hpp"

namespace p2pdb {

/// Parses the network description format:
///
///   node 1 { fact Citizen-1(ann). }
///   node 2 { rule P(x) :- Q(x,y). clause P(a) | Q(a,b). denial :- P(x), R(x). inconsistent. }
///   link 1:Citizen-1(x) => 2:Male-2(x) | 2:Female-2(x).
///
/// `#` starts a line comment. Inside rules, denials, links and queries a token
/// starting with a lowercase letter is a variable; quoted strings and tokens
/// starting with an uppercase letter or digit are constants. Facts and clauses
/// are ground, so every argument there is a constant. A link may carry an
/// explicit id (`link @copy 1:P(x) => 2:P(x).`); otherwise links are numbered
/// r1, r2, ... in file order.
///
/// Throws ParseError on syntax errors, unknown node ids, arity mismatches and
/// links whose node indices are not pairwise distinct.
P2PSystem parse_network(std::string_view text);

/// Text that parse_network maps back to an equal system.
std::string serialize(const P2PSystem& system);

/// `<node>: [x,y] A(x,z) & B(z,y) | C(x,y)`. The bracketed answer variables are
/// optional and default to the variables of the first disjunct. Throws
/// FragmentError for negation and ParseError for malformed input.
Query parse_query(std::string_view text);

/// `<node>: <formula>` with `!`, `&`, `|`, parentheses, `exists v.` and `forall v.`.
/// A lowercase token is a variable only when an enclosing quantifier binds it.
struct NodeFormula {
    NodeId node;
    Formula formula;
};
NodeFormula parse_formula(std::string_view text);

} // namespace p2pdb

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "p2pdb/model.hpp"

namespace p2pdb {

/// Quantifier-free formulas plus quantifiers that are grounded over a finite
/// domain before use. Only the oracle evaluates these.
struct Formula {
    enum class Kind : unsigned char { atom, negation, conjunction, disjunction, exists, forall };

    Kind kind = Kind::atom;
    Atom atom;                          // kind == atom
    std::vector<Formula> children;      // negation has exactly one
    std::string bound_var;              // exists / forall

    static Formula make_atom(Atom a);
    static Formula negate(Formula f);
    static Formula all_of(std::vector<Formula> fs);
    static Formula any_of(std::vector<Formula> fs);
    static Formula exists(std::string var, Formula body);
    static Formula forall(std::string var, Formula body);

    bool is_ground() const;
    bool operator==(const Formula&) const = default;
};

/// Replaces quantifiers by finite conjunctions/disjunctions over `domain` and
/// substitutes the bound variables. Throws if a free variable remains.
Formula ground(const Formula& formula, const std::vector<Term>& domain);

/// Evaluates a ground formula; `holds` decides atoms.
bool evaluate(const Formula& formula, const std::function<bool(const Atom&)>& holds);

void collect_atoms(const Formula& formula, std::vector<Atom>& out);

std::string to_string(const Formula& formula);

} // namespace p2pdb

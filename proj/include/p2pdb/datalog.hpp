#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "p2pdb/model.hpp"

namespace p2pdb::datalog {

struct TermHash {
    std::size_t operator()(const Term& t) const noexcept {
        return std::hash<std::string>{}(t.name) * 3 + static_cast<std::size_t>(t.kind);
    }
};

struct TupleHash {
    std::size_t operator()(const Tuple& tuple) const noexcept {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (const auto& t : tuple) {
            h = (h ^ TermHash{}(t)) * 0x100000001b3ULL;
        }
        return h;
    }
};

/// Set of ground tuples with insertion order kept and lazily built hash indexes
/// on bound column subsets.
class Relation {
public:
    bool insert(Tuple tuple);
    bool contains(const Tuple& tuple) const { return members_.contains(tuple); }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    const std::vector<Tuple>& rows() const noexcept { return rows_; }

    /// Row indices whose `columns` equal `key`. Builds the index on first use.
    const std::vector<std::size_t>& lookup(const std::vector<std::size_t>& columns, const Tuple& key) const;

private:
    using Index = std::unordered_map<Tuple, std::vector<std::size_t>, TupleHash>;

    std::vector<Tuple> rows_;
    std::unordered_set<Tuple, TupleHash> members_;
    mutable std::map<std::vector<std::size_t>, Index> indexes_;
};

/// Ground atoms grouped by predicate.
class Database {
public:
    Database() = default;
    template <typename Range>
    explicit Database(const Range& atoms) {
        for (const auto& a : atoms) {
            insert(a);
        }
    }

    bool insert(const Atom& atom);
    bool contains(const Atom& atom) const;
    const Relation* relation(const PredicateKey& key) const;
    Relation& relation_for(const PredicateKey& key) { return relations_[key]; }
    const std::map<PredicateKey, Relation>& relations() const noexcept { return relations_; }
    std::size_t size() const;
    std::set<Atom> atoms() const;

private:
    std::map<PredicateKey, Relation> relations_;
};

/// A conjunction compiled to variable slots.
class Pattern {
public:
    explicit Pattern(const Conjunction& atoms, std::vector<std::string> leading_vars = {});

    const std::vector<std::string>& variables() const noexcept { return vars_; }
    std::size_t slot(const std::string& var) const;
    std::size_t size() const noexcept { return atoms_.size(); }
    const Conjunction& atoms() const noexcept { return source_; }

    using Binding = std::vector<const Term*>;
    using Visitor = std::function<void(const Binding&)>;

    /// Enumerates all bindings of the variables such that every atom is in `db`.
    /// If `delta_pos` is set, atom at that position is matched against `delta` instead.
    void match(const Database& db, const Visitor& visit, std::size_t delta_pos = npos,
               const Relation* delta = nullptr) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    struct Arg {
        bool is_var;
        std::size_t slot;
        Term constant;
    };
    struct CompiledAtom {
        PredicateKey key;
        std::vector<Arg> args;
    };

    void match_from(const Database& db, std::size_t depth, const std::vector<std::size_t>& order,
                    Binding& binding, const Visitor& visit, std::size_t delta_pos,
                    const Relation* delta) const;

    Conjunction source_;
    std::vector<std::string> vars_;
    std::vector<CompiledAtom> atoms_;
};

/// Answers of `atoms` projected on `vars` (each var must occur in `atoms`).
std::set<Tuple> evaluate(const Database& db, const Conjunction& atoms, const std::vector<std::string>& vars);

/// True iff some binding satisfies all `atoms` in `db`.
bool satisfiable(const Database& db, const Conjunction& atoms);

/// Closes `db` under `rules` with delta-driven iteration. Returns the number of rounds.
std::size_t seminaive_closure(Database& db, std::span<const DefiniteRule> rules);

/// Reference closure: re-fires every rule against the whole database each round.
std::size_t naive_closure(Database& db, std::span<const DefiniteRule> rules);

/// Grounds `atom` with `binding`; every variable of `atom` must be a variable of `pattern`.
Atom instantiate(const Atom& atom, const Pattern& pattern, const Pattern::Binding& binding);

} // namespace p2pdb::datalog

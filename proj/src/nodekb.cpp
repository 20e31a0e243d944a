#include "p2pdb/nodekb.hpp"

#include <algorithm>

#include "p2pdb/datalog.hpp"
#include "p2pdb/errors.hpp"

namespace p2pdb::nodekb {

NodeStatus NodeStatus::consistent(std::vector<HerbrandInterpretation> minimal_models) {
    NodeStatus s;
    std::sort(minimal_models.begin(), minimal_models.end());
    minimal_models.erase(std::unique(minimal_models.begin(), minimal_models.end()), minimal_models.end());
    s.models_ = std::move(minimal_models);
    return s;
}

namespace {

bool violates_denial(const datalog::Database& db, const LocalTheory& theory) {
    return std::any_of(theory.denials.begin(), theory.denials.end(),
                       [&](const Denial& d) { return datalog::satisfiable(db, d.body); });
}

const Clause* first_unsatisfied(const datalog::Database& db, const LocalTheory& theory) {
    for (const auto& c : theory.clauses) {
        if (std::none_of(c.atoms.begin(), c.atoms.end(), [&](const Atom& a) { return db.contains(a); })) {
            return &c;
        }
    }
    return nullptr;
}

// Every minimal model M contains the least model of the current seed, and M
// satisfies each clause through some atom, so branching on the atoms of an
// unsatisfied clause reaches every minimal model.
void branch(const LocalTheory& theory, std::set<Atom> seed, std::vector<std::set<Atom>>& candidates,
            std::set<std::set<Atom>>& visited) {
    if (!visited.insert(seed).second) {
        return;
    }
    datalog::Database db(seed);
    datalog::seminaive_closure(db, theory.rules);
    if (violates_denial(db, theory)) {
        return;
    }
    const Clause* open = first_unsatisfied(db, theory);
    if (!open) {
        candidates.push_back(db.atoms());
        return;
    }
    for (const auto& a : open->atoms) {
        auto next = seed;
        next.insert(a);
        branch(theory, std::move(next), candidates, visited);
    }
}

} // namespace

NodeStatus minimal_models(const LocalTheory& theory, const Options& options) {
    if (theory.clauses.size() > options.branching_cap) {
        throw CapExceeded("branching-cap-exceeded: node " + theory.node + " has " +
                          std::to_string(theory.clauses.size()) + " clauses (cap " +
                          std::to_string(options.branching_cap) + ")");
    }
    if (theory.falsum) {
        return NodeStatus::inconsistent();
    }
    std::vector<std::set<Atom>> candidates;
    std::set<std::set<Atom>> visited;
    branch(theory, theory.facts, candidates, visited);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<HerbrandInterpretation> minimal;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < candidates.size() && !dominated; ++j) {
            dominated = j != i && candidates[j].size() < candidates[i].size() &&
                        std::includes(candidates[i].begin(), candidates[i].end(), candidates[j].begin(),
                                      candidates[j].end());
        }
        if (!dominated) {
            minimal.push_back({theory.node, candidates[i]});
        }
    }
    if (minimal.empty()) {
        return NodeStatus::inconsistent();
    }
    return NodeStatus::consistent(std::move(minimal));
}

std::set<Tuple> answers_in(const HerbrandInterpretation& model, const Query& query) {
    const datalog::Database db(model.true_atoms);
    std::set<Tuple> out;
    for (const auto& d : query.disjuncts) {
        out.merge(datalog::evaluate(db, d, query.answer_vars));
    }
    return out;
}

std::set<Tuple> all_tuples(const std::vector<Term>& domain, std::size_t arity) {
    std::set<Tuple> out;
    if (arity > 0 && domain.empty()) {
        return out;
    }
    std::vector<std::size_t> idx(arity, 0);
    while (true) {
        Tuple t;
        t.reserve(arity);
        for (auto i : idx) {
            t.push_back(domain[i]);
        }
        out.insert(std::move(t));
        std::size_t k = arity;
        while (k > 0 && ++idx[k - 1] == domain.size()) {
            idx[--k] = 0;
        }
        if (k == 0) {
            break;
        }
    }
    return out;
}

std::set<Tuple> certain_relation(const NodeStatus& status, const Query& query, const std::vector<Term>& domain) {
    if (!status.is_consistent()) {
        return all_tuples(domain, query.arity());
    }
    const auto& models = status.models();
    std::set<Tuple> result = answers_in(models.front(), query);
    for (std::size_t i = 1; i < models.size() && !result.empty(); ++i) {
        const auto next = answers_in(models[i], query);
        std::erase_if(result, [&](const Tuple& t) { return !next.contains(t); });
    }
    return result;
}

AnswerSet certain_answers_local(const NodeStatus& status, const Query& query, const std::vector<Term>& domain) {
    auto rel = certain_relation(status, query, domain);
    std::erase_if(rel, [](const Tuple& t) { return std::any_of(t.begin(), t.end(), [](const Term& x) { return !x.is_constant(); }); });
    return rel;
}

bool satisfies(const HerbrandInterpretation& model, const LocalTheory& theory) {
    if (theory.falsum) {
        return false;
    }
    const datalog::Database db(model.true_atoms);
    for (const auto& f : theory.facts) {
        if (!db.contains(f)) {
            return false;
        }
    }
    for (const auto& c : theory.clauses) {
        if (std::none_of(c.atoms.begin(), c.atoms.end(), [&](const Atom& a) { return db.contains(a); })) {
            return false;
        }
    }
    if (violates_denial(db, theory)) {
        return false;
    }
    for (const auto& r : theory.rules) {
        datalog::Pattern body(r.body);
        bool closed = true;
        body.match(db, [&](const datalog::Pattern::Binding& b) {
            closed = closed && db.contains(datalog::instantiate(r.head, body, b));
        });
        if (!closed) {
            return false;
        }
    }
    return true;
}

} // namespace p2pdb::nodekb

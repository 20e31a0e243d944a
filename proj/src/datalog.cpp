#include "p2pdb/datalog.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace p2pdb::datalog {

bool Relation::insert(Tuple tuple) {
    if (members_.contains(tuple)) {
        return false;
    }
    const std::size_t row = rows_.size();
    for (auto& [columns, index] : indexes_) {
        Tuple key;
        key.reserve(columns.size());
        for (auto c : columns) {
            key.push_back(tuple[c]);
        }
        index[std::move(key)].push_back(row);
    }
    members_.insert(tuple);
    rows_.push_back(std::move(tuple));
    return true;
}

const std::vector<std::size_t>& Relation::lookup(const std::vector<std::size_t>& columns, const Tuple& key) const {
    static const std::vector<std::size_t> none;
    auto it = indexes_.find(columns);
    if (it == indexes_.end()) {
        Index index;
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            Tuple k;
            k.reserve(columns.size());
            for (auto c : columns) {
                k.push_back(rows_[r][c]);
            }
            index[std::move(k)].push_back(r);
        }
        it = indexes_.emplace(columns, std::move(index)).first;
    }
    auto hit = it->second.find(key);
    return hit == it->second.end() ? none : hit->second;
}

bool Database::insert(const Atom& atom) {
    return relations_[atom.key()].insert(atom.args);
}

bool Database::contains(const Atom& atom) const {
    const auto* rel = relation(atom.key());
    return rel && rel->contains(atom.args);
}

const Relation* Database::relation(const PredicateKey& key) const {
    auto it = relations_.find(key);
    return it == relations_.end() ? nullptr : &it->second;
}

std::size_t Database::size() const {
    std::size_t n = 0;
    for (const auto& [_, rel] : relations_) {
        n += rel.size();
    }
    return n;
}

std::set<Atom> Database::atoms() const {
    std::set<Atom> out;
    for (const auto& [key, rel] : relations_) {
        for (const auto& row : rel.rows()) {
            out.insert(Atom{key.node, key.name, row});
        }
    }
    return out;
}

Pattern::Pattern(const Conjunction& atoms, std::vector<std::string> leading_vars)
    : source_(atoms), vars_(std::move(leading_vars)) {
    for (const auto& v : variables_of(atoms)) {
        if (std::find(vars_.begin(), vars_.end(), v) == vars_.end()) {
            vars_.push_back(v);
        }
    }
    atoms_.reserve(atoms.size());
    for (const auto& a : atoms) {
        CompiledAtom ca{a.key(), {}};
        for (const auto& t : a.args) {
            if (t.is_variable()) {
                ca.args.push_back({true, slot(t.name), {}});
            } else {
                ca.args.push_back({false, 0, t});
            }
        }
        atoms_.push_back(std::move(ca));
    }
}

std::size_t Pattern::slot(const std::string& var) const {
    auto it = std::find(vars_.begin(), vars_.end(), var);
    if (it == vars_.end()) {
        throw std::invalid_argument("variable " + var + " not bound by pattern");
    }
    return static_cast<std::size_t>(it - vars_.begin());
}

void Pattern::match(const Database& db, const Visitor& visit, std::size_t delta_pos, const Relation* delta) const {
    // Greedy join order: delta atom first, then the atom with most bound slots.
    std::vector<std::size_t> order;
    std::vector<bool> used(atoms_.size(), false);
    std::vector<bool> bound(vars_.size(), false);
    auto take = [&](std::size_t i) {
        used[i] = true;
        order.push_back(i);
        for (const auto& arg : atoms_[i].args) {
            if (arg.is_var) {
                bound[arg.slot] = true;
            }
        }
    };
    if (delta_pos != npos) {
        take(delta_pos);
    }
    while (order.size() < atoms_.size()) {
        std::size_t best = npos;
        long best_score = -1;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (used[i]) {
                continue;
            }
            long score = 0;
            for (const auto& arg : atoms_[i].args) {
                score += (!arg.is_var || bound[arg.slot]) ? 2 : 0;
            }
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        take(best);
    }
    Binding binding(vars_.size(), nullptr);
    match_from(db, 0, order, binding, visit, delta_pos, delta);
}

void Pattern::match_from(const Database& db, std::size_t depth, const std::vector<std::size_t>& order,
                         Binding& binding, const Visitor& visit, std::size_t delta_pos,
                         const Relation* delta) const {
    if (depth == order.size()) {
        visit(binding);
        return;
    }
    const std::size_t pos = order[depth];
    const CompiledAtom& atom = atoms_[pos];
    const Relation* rel = pos == delta_pos ? delta : db.relation(atom.key);
    if (!rel || rel->empty()) {
        return;
    }

    std::vector<std::size_t> columns;
    Tuple key;
    for (std::size_t c = 0; c < atom.args.size(); ++c) {
        const Arg& arg = atom.args[c];
        if (!arg.is_var) {
            columns.push_back(c);
            key.push_back(arg.constant);
        } else if (binding[arg.slot]) {
            columns.push_back(c);
            key.push_back(*binding[arg.slot]);
        }
    }

    auto try_row = [&](const Tuple& row) {
        if (row.size() != atom.args.size()) {
            return;
        }
        std::vector<std::size_t> newly;
        bool ok = true;
        for (std::size_t c = 0; c < atom.args.size(); ++c) {
            const Arg& arg = atom.args[c];
            if (!arg.is_var) {
                continue;
            }
            if (binding[arg.slot]) {
                if (*binding[arg.slot] != row[c]) {
                    ok = false;
                    break;
                }
            } else {
                binding[arg.slot] = &row[c];
                newly.push_back(arg.slot);
            }
        }
        if (ok) {
            match_from(db, depth + 1, order, binding, visit, delta_pos, delta);
        }
        for (auto s : newly) {
            binding[s] = nullptr;
        }
    };

    if (columns.empty()) {
        for (const auto& row : rel->rows()) {
            try_row(row);
        }
    } else {
        for (auto r : rel->lookup(columns, key)) {
            try_row(rel->rows()[r]);
        }
    }
}

Atom instantiate(const Atom& atom, const Pattern& pattern, const Pattern::Binding& binding) {
    Atom out{atom.node, atom.predicate, {}};
    out.args.reserve(atom.args.size());
    for (const auto& t : atom.args) {
        if (t.is_variable()) {
            const Term* value = binding[pattern.slot(t.name)];
            assert(value);
            out.args.push_back(*value);
        } else {
            out.args.push_back(t);
        }
    }
    return out;
}

std::set<Tuple> evaluate(const Database& db, const Conjunction& atoms, const std::vector<std::string>& vars) {
    Pattern pattern(atoms, vars);
    std::set<Tuple> out;
    pattern.match(db, [&](const Pattern::Binding& b) {
        Tuple t;
        t.reserve(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i) {
            t.push_back(*b[i]);
        }
        out.insert(std::move(t));
    });
    return out;
}

bool satisfiable(const Database& db, const Conjunction& atoms) {
    // Visitor cannot stop early; conjunctions checked here are small.
    bool found = false;
    Pattern(atoms).match(db, [&](const Pattern::Binding&) { found = true; });
    return found;
}

namespace {

struct CompiledRule {
    const DefiniteRule* rule;
    Pattern body;
};

std::vector<CompiledRule> compile(std::span<const DefiniteRule> rules) {
    std::vector<CompiledRule> out;
    out.reserve(rules.size());
    for (const auto& r : rules) {
        out.push_back({&r, Pattern(r.body)});
    }
    return out;
}

} // namespace

std::size_t seminaive_closure(Database& db, std::span<const DefiniteRule> rules) {
    const auto compiled = compile(rules);
    std::set<PredicateKey> heads;
    for (const auto& r : rules) {
        heads.insert(r.head.key());
    }

    // Round 0: every rule against the whole database.
    std::map<PredicateKey, Relation> delta;
    for (const auto& cr : compiled) {
        std::vector<Atom> fresh;
        cr.body.match(db, [&](const Pattern::Binding& b) { fresh.push_back(instantiate(cr.rule->head, cr.body, b)); });
        for (auto& a : fresh) {
            if (!db.contains(a)) {
                delta[a.key()].insert(a.args);
            }
        }
    }
    std::size_t rounds = 1;
    while (!delta.empty()) {
        for (const auto& [key, rel] : delta) {
            auto& target = db.relation_for(key);
            for (const auto& row : rel.rows()) {
                target.insert(row);
            }
        }
        std::map<PredicateKey, Relation> next;
        for (const auto& cr : compiled) {
            const auto& body = cr.rule->body;
            for (std::size_t i = 0; i < body.size(); ++i) {
                auto it = delta.find(body[i].key());
                if (it == delta.end()) {
                    continue;
                }
                std::vector<Atom> fresh;
                cr.body.match(
                    db, [&](const Pattern::Binding& b) { fresh.push_back(instantiate(cr.rule->head, cr.body, b)); }, i,
                    &it->second);
                for (auto& a : fresh) {
                    if (!db.contains(a)) {
                        next[a.key()].insert(a.args);
                    }
                }
            }
        }
        delta = std::move(next);
        ++rounds;
    }
    return rounds;
}

std::size_t naive_closure(Database& db, std::span<const DefiniteRule> rules) {
    const auto compiled = compile(rules);
    std::size_t rounds = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        ++rounds;
        std::vector<Atom> fresh;
        for (const auto& cr : compiled) {
            cr.body.match(db, [&](const Pattern::Binding& b) { fresh.push_back(instantiate(cr.rule->head, cr.body, b)); });
        }
        for (const auto& a : fresh) {
            changed |= db.insert(a);
        }
    }
    return rounds;
}

} // namespace p2pdb::datalog

#include "p2pdb/compiler.hpp"

#include <algorithm>

#include "p2pdb/datalog.hpp"
#include "p2pdb/errors.hpp"

namespace p2pdb::compiler {

void require_datalog_p2p(const P2PSystem& system) {
    for (const auto& [id, th] : system.nodes) {
        if (!th.clauses.empty()) {
            throw FragmentError("not a Datalog-p2p system: node " + id + " has disjunctive clauses");
        }
        if (!th.denials.empty()) {
            throw FragmentError("not a Datalog-p2p system: node " + id + " has denial constraints");
        }
        if (th.falsum) {
            throw FragmentError("not a Datalog-p2p system: node " + id + " is declared inconsistent");
        }
    }
    for (const auto& r : system.rules) {
        if (r.head_kind == HeadKind::disjunctive) {
            throw FragmentError("not a Datalog-p2p system: link " + r.id + " has a disjunctive head");
        }
        if (r.head_kind == HeadKind::existential) {
            throw FragmentError("not a Datalog-p2p system: link " + r.id + " has existential head variables");
        }
    }
}

DatalogProgram compile_global_program(const P2PSystem& system) {
    require_datalog_p2p(system);
    const auto violations = validate(system);
    if (!violations.empty()) {
        throw FragmentError("invalid system: " + violations.front().element + ": " + violations.front().invariant);
    }

    DatalogProgram program;
    for (const auto& [_, th] : system.nodes) {
        program.edb.insert(th.facts.begin(), th.facts.end());
        program.idb.insert(program.idb.end(), th.rules.begin(), th.rules.end());
    }
    for (const auto& r : system.rules) {
        Conjunction body;
        for (const auto& c : r.body) {
            body.insert(body.end(), c.atoms.begin(), c.atoms.end());
        }
        for (const auto& h : r.head) {
            program.idb.push_back({h, body});
        }
    }

    std::map<PredicateKey, std::size_t> derived;
    for (const auto& r : program.idb) {
        derived.emplace(r.head.key(), r.head.arity());
    }
    std::set<Atom> edb;
    std::set<PredicateKey> split;
    for (const auto& f : program.edb) {
        if (derived.contains(f.key())) {
            split.insert(f.key());
            edb.insert(Atom{f.node, f.predicate + edb_suffix, f.args});
        } else {
            edb.insert(f);
        }
    }
    program.edb = std::move(edb);
    for (const auto& key : split) {
        Atom head{key.node, key.name, {}};
        for (std::size_t i = 0; i < derived.at(key); ++i) {
            head.args.push_back(Term::variable("v" + std::to_string(i)));
        }
        Atom src = head;
        src.predicate += edb_suffix;
        program.idb.push_back({head, {src}});
    }
    std::sort(program.idb.begin(), program.idb.end());
    return program;
}

namespace {

std::set<Atom> derived_only(const datalog::Database& db, const std::set<Atom>& edb) {
    std::set<Atom> out = db.atoms();
    for (const auto& a : edb) {
        out.erase(a);
    }
    return out;
}

} // namespace

std::set<Atom> seminaive_eval(const DatalogProgram& program) {
    datalog::Database db(program.edb);
    datalog::seminaive_closure(db, program.idb);
    return derived_only(db, program.edb);
}

std::set<Atom> naive_eval(const DatalogProgram& program) {
    datalog::Database db(program.edb);
    datalog::naive_closure(db, program.idb);
    return derived_only(db, program.edb);
}

AnswerSet answer_via_global(const P2PSystem& system, const Query& query) {
    const auto program = compile_global_program(system);
    datalog::Database db(program.edb);
    datalog::seminaive_closure(db, program.idb);
    AnswerSet out;
    for (const auto& d : query.disjuncts) {
        out.merge(datalog::evaluate(db, d, query.answer_vars));
    }
    return out;
}

namespace {

std::string qualified(const Atom& a) {
    std::string s = "n" + a.node + "." + a.predicate + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        s += (i ? "," : "") + a.args[i].name;
    }
    return s + ")";
}

} // namespace

std::string export_program(const DatalogProgram& program) {
    std::vector<std::string> lines;
    for (const auto& f : program.edb) {
        lines.push_back(qualified(f) + ".");
    }
    for (const auto& r : program.idb) {
        std::string s = qualified(r.head) + " :- ";
        for (std::size_t i = 0; i < r.body.size(); ++i) {
            s += (i ? ", " : "") + qualified(r.body[i]);
        }
        lines.push_back(s + ".");
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) {
        out += l + "\n";
    }
    return out;
}

} // namespace p2pdb::compiler

#include "p2pdb/model.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace p2pdb {

namespace {

void collect_vars(const Atom& atom, std::vector<std::string>& out) {
    for (const auto& t : atom.args) {
        if (t.is_variable() && std::find(out.begin(), out.end(), t.name) == out.end()) {
            out.push_back(t.name);
        }
    }
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

void collect_constants(const Atom& atom, std::set<Term>& out) {
    for (const auto& t : atom.args) {
        if (t.is_constant()) {
            out.insert(t);
        }
    }
}

} // namespace

bool Atom::is_ground() const {
    return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_ground(); });
}

bool LocalTheory::add_fact(const Atom& fact) {
    if (!facts.insert(fact).second) {
        return false;
    }
    std::erase_if(clauses, [&](const Clause& c) { return c.atoms.contains(fact); });
    return true;
}

bool LocalTheory::add_clause(Clause clause) {
    if (clause.atoms.empty()) {
        return false;
    }
    if (clause.atoms.size() == 1) {
        return add_fact(*clause.atoms.begin());
    }
    for (const auto& a : clause.atoms) {
        if (facts.contains(a)) {
            return false;
        }
    }
    for (const auto& existing : clauses) {
        if (std::includes(clause.atoms.begin(), clause.atoms.end(),
                          existing.atoms.begin(), existing.atoms.end())) {
            return false;
        }
    }
    std::erase_if(clauses, [&](const Clause& c) {
        return std::includes(c.atoms.begin(), c.atoms.end(), clause.atoms.begin(), clause.atoms.end());
    });
    clauses.insert(std::move(clause));
    return true;
}

std::vector<std::string> variables_of(const Conjunction& atoms) {
    std::vector<std::string> out;
    for (const auto& a : atoms) {
        collect_vars(a, out);
    }
    return out;
}

std::vector<std::string> CoordinationRule::distinguished_vars() const {
    std::vector<std::string> head_vars = variables_of(head);
    std::map<std::string, int> conjunct_count;
    for (const auto& conj : body) {
        for (const auto& v : variables_of(conj.atoms)) {
            ++conjunct_count[v];
        }
    }
    std::vector<std::string> out;
    for (const auto& conj : body) {
        for (const auto& v : variables_of(conj.atoms)) {
            if ((contains(head_vars, v) || conjunct_count[v] > 1) && !contains(out, v)) {
                out.push_back(v);
            }
        }
    }
    return out;
}

std::vector<std::string> CoordinationRule::conjunct_vars(std::size_t index) const {
    const auto local = variables_of(body.at(index).atoms);
    std::vector<std::string> out;
    for (const auto& v : distinguished_vars()) {
        if (contains(local, v)) {
            out.push_back(v);
        }
    }
    return out;
}

std::vector<std::string> CoordinationRule::existential_vars() const {
    std::vector<std::string> body_vars;
    for (const auto& conj : body) {
        for (const auto& a : conj.atoms) {
            collect_vars(a, body_vars);
        }
    }
    std::vector<std::string> out;
    for (const auto& v : variables_of(head)) {
        if (!contains(body_vars, v)) {
            out.push_back(v);
        }
    }
    return out;
}

const CoordinationRule* P2PSystem::find_rule(const std::string& id) const {
    for (const auto& r : rules) {
        if (r.id == id) {
            return &r;
        }
    }
    return nullptr;
}

std::vector<Violation> validate(const P2PSystem& system) {
    std::vector<Violation> out;
    std::map<PredicateKey, std::size_t> arities;

    auto check_arity = [&](const Atom& a, const std::string& where) {
        auto [it, inserted] = arities.emplace(a.key(), a.arity());
        if (!inserted && it->second != a.arity()) {
            out.push_back({where, "predicate " + a.node + ":" + a.predicate + " used with arity " +
                                      std::to_string(a.arity()) + " but declared with arity " +
                                      std::to_string(it->second)});
        }
    };
    auto check_node = [&](const Atom& a, const NodeId& expected, const std::string& where) {
        if (a.node != expected) {
            out.push_back({where, "atom " + to_string(a) + " must belong to node " + expected});
        }
    };

    for (const auto& [id, theory] : system.nodes) {
        const std::string where = "node " + id;
        if (theory.node != id) {
            out.push_back({where, "theory carries node id " + theory.node});
        }
        for (const auto& f : theory.facts) {
            check_node(f, id, where + " fact " + to_string(f));
            check_arity(f, where + " fact " + to_string(f));
            if (!f.is_ground()) {
                out.push_back({where + " fact " + to_string(f), "facts must be ground"});
            }
        }
        for (const auto& r : theory.rules) {
            const std::string rw = where + " rule " + to_string(r.head);
            check_node(r.head, id, rw);
            check_arity(r.head, rw);
            if (r.body.empty()) {
                out.push_back({rw, "definite rule needs a non-empty body"});
            }
            for (const auto& b : r.body) {
                check_node(b, id, rw);
                check_arity(b, rw);
            }
            const auto body_vars = variables_of(r.body);
            for (const auto& v : variables_of({r.head})) {
                if (!contains(body_vars, v)) {
                    out.push_back({rw, "head variable " + v + " does not occur in the body (range restriction)"});
                }
            }
        }
        for (const auto& c : theory.clauses) {
            const std::string cw = where + " clause " + to_string(c);
            if (c.atoms.size() < 2) {
                out.push_back({cw, "clause needs at least two atoms"});
            }
            for (const auto& a : c.atoms) {
                check_node(a, id, cw);
                check_arity(a, cw);
                if (!a.is_ground()) {
                    out.push_back({cw, "clauses must be ground"});
                }
            }
        }
        for (const auto& d : theory.denials) {
            const std::string dw = where + " denial";
            if (d.body.empty()) {
                out.push_back({dw, "denial needs a non-empty body"});
            }
            for (const auto& a : d.body) {
                check_node(a, id, dw);
                check_arity(a, dw);
            }
        }
    }

    std::set<std::string> rule_ids;
    for (const auto& rule : system.rules) {
        const std::string where = "link " + rule.id;
        if (rule.id.empty()) {
            out.push_back({where, "rule id must be non-empty"});
        } else if (!rule_ids.insert(rule.id).second) {
            out.push_back({where, "duplicate rule id"});
        }
        if (rule.body.empty()) {
            out.push_back({where, "rule needs at least one body conjunct"});
        }
        if (rule.head.empty()) {
            out.push_back({where, "rule needs at least one head atom"});
        }
        std::set<NodeId> seen{rule.target};
        if (!system.nodes.contains(rule.target)) {
            out.push_back({where, "unknown target node " + rule.target});
        }
        for (const auto& conj : rule.body) {
            if (!system.nodes.contains(conj.source)) {
                out.push_back({where, "unknown source node " + conj.source});
            }
            if (!seen.insert(conj.source).second) {
                out.push_back({where, "node indices of a coordination rule must be pairwise distinct (node " +
                                          conj.source + " repeated)"});
            }
            if (conj.atoms.empty()) {
                out.push_back({where, "empty body conjunct at node " + conj.source});
            }
            for (const auto& a : conj.atoms) {
                check_node(a, conj.source, where);
                check_arity(a, where);
            }
        }
        for (const auto& a : rule.head) {
            check_node(a, rule.target, where);
            check_arity(a, where);
        }
        const auto fresh = rule.existential_vars();
        if (rule.head_kind == HeadKind::existential) {
            if (fresh.empty()) {
                out.push_back({where, "existential head without existential variables"});
            }
        } else if (!fresh.empty()) {
            out.push_back({where, "head variable " + fresh.front() + " does not occur in the body"});
        }
    }
    return out;
}

std::vector<Violation> validate(const Query& query) {
    std::vector<Violation> out;
    const std::string where = "query at node " + query.node;
    if (query.disjuncts.empty()) {
        out.push_back({where, "query needs at least one disjunct"});
    }
    for (const auto& d : query.disjuncts) {
        const auto vars = variables_of(d);
        for (const auto& a : d) {
            if (a.node != query.node) {
                out.push_back({where, "atom " + to_string(a) + " is not at the query node"});
            }
        }
        for (const auto& v : query.answer_vars) {
            if (!contains(vars, v)) {
                out.push_back({where, "answer variable " + v + " missing from a disjunct (range restriction)"});
            }
        }
    }
    return out;
}

std::vector<NodeId> DependencyGraph::successors(const NodeId& node) const {
    std::vector<NodeId> out;
    for (auto it = edges.lower_bound({node, NodeId{}}); it != edges.end() && it->first == node; ++it) {
        out.push_back(it->second);
    }
    return out;
}

std::optional<std::vector<NodeId>> DependencyGraph::topological_order() const {
    std::map<NodeId, std::size_t> indegree;
    for (const auto& n : nodes) {
        indegree[n] = 0;
    }
    for (const auto& [from, to] : edges) {
        ++indegree[to];
    }
    std::set<NodeId> ready;
    for (const auto& [n, d] : indegree) {
        if (d == 0) {
            ready.insert(n);
        }
    }
    std::vector<NodeId> order;
    while (!ready.empty()) {
        NodeId n = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(n);
        for (const auto& s : successors(n)) {
            if (--indegree[s] == 0) {
                ready.insert(s);
            }
        }
    }
    if (order.size() != indegree.size()) {
        return std::nullopt;
    }
    return order;
}

std::set<NodeId> DependencyGraph::reachable_from(const NodeId& start) const {
    std::set<NodeId> seen{start};
    std::deque<NodeId> work{start};
    while (!work.empty()) {
        NodeId n = work.front();
        work.pop_front();
        for (const auto& s : successors(n)) {
            if (seen.insert(s).second) {
                work.push_back(s);
            }
        }
    }
    return seen;
}

DependencyGraph dependency_graph(const P2PSystem& system) {
    DependencyGraph g;
    for (const auto& [id, _] : system.nodes) {
        g.nodes.insert(id);
    }
    for (const auto& rule : system.rules) {
        g.nodes.insert(rule.target);
        for (const auto& conj : rule.body) {
            g.nodes.insert(conj.source);
            g.edges.insert({conj.source, rule.target});
        }
    }
    g.acyclic = g.topological_order().has_value();
    return g;
}

std::vector<Term> active_domain(const P2PSystem& system) {
    std::set<Term> out;
    for (const auto& [_, theory] : system.nodes) {
        for (const auto& f : theory.facts) {
            collect_constants(f, out);
        }
        for (const auto& r : theory.rules) {
            collect_constants(r.head, out);
            for (const auto& b : r.body) {
                collect_constants(b, out);
            }
        }
        for (const auto& c : theory.clauses) {
            for (const auto& a : c.atoms) {
                collect_constants(a, out);
            }
        }
        for (const auto& d : theory.denials) {
            for (const auto& a : d.body) {
                collect_constants(a, out);
            }
        }
    }
    for (const auto& rule : system.rules) {
        for (const auto& conj : rule.body) {
            for (const auto& a : conj.atoms) {
                collect_constants(a, out);
            }
        }
        for (const auto& a : rule.head) {
            collect_constants(a, out);
        }
    }
    return {out.begin(), out.end()};
}

bool has_existential_heads(const P2PSystem& system) {
    return std::any_of(system.rules.begin(), system.rules.end(),
                       [](const CoordinationRule& r) { return r.head_kind == HeadKind::existential; });
}

std::string to_string(const Term& term) {
    return term.name;
}

std::string to_string(const Atom& atom) {
    std::string s = atom.node + ":" + atom.predicate + "(";
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        if (i) {
            s += ",";
        }
        s += to_string(atom.args[i]);
    }
    return s + ")";
}

std::string to_string(const Tuple& tuple) {
    std::string s;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (i) {
            s += ",";
        }
        s += to_string(tuple[i]);
    }
    return s;
}

std::string to_string(const Clause& clause) {
    std::string s;
    for (const auto& a : clause.atoms) {
        if (!s.empty()) {
            s += " | ";
        }
        s += to_string(a);
    }
    return s;
}

std::string to_string(const Query& query) {
    std::ostringstream os;
    os << query.node << ": [";
    for (std::size_t i = 0; i < query.answer_vars.size(); ++i) {
        os << (i ? "," : "") << query.answer_vars[i];
    }
    os << "]";
    for (std::size_t d = 0; d < query.disjuncts.size(); ++d) {
        os << (d ? " | " : " ");
        for (std::size_t i = 0; i < query.disjuncts[d].size(); ++i) {
            os << (i ? " & " : "") << query.disjuncts[d][i].predicate << "(";
            const auto& args = query.disjuncts[d][i].args;
            for (std::size_t k = 0; k < args.size(); ++k) {
                os << (k ? "," : "") << args[k].name;
            }
            os << ")";
        }
    }
    return os.str();
}

} // namespace p2pdb

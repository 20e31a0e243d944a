#include "p2pdb/fixpoint.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "p2pdb/datalog.hpp"
#include "p2pdb/errors.hpp"

namespace p2pdb::fixpoint {

namespace {

struct VarRelation {
    std::vector<std::string> vars;
    std::set<Tuple> rows;
};

VarRelation natural_join(const VarRelation& left, const VarRelation& right) {
    VarRelation out{left.vars, {}};
    std::vector<std::pair<std::size_t, std::size_t>> shared;
    std::vector<std::size_t> extra;
    for (std::size_t j = 0; j < right.vars.size(); ++j) {
        auto it = std::find(left.vars.begin(), left.vars.end(), right.vars[j]);
        if (it == left.vars.end()) {
            extra.push_back(j);
            out.vars.push_back(right.vars[j]);
        } else {
            shared.emplace_back(static_cast<std::size_t>(it - left.vars.begin()), j);
        }
    }
    std::map<Tuple, std::vector<const Tuple*>> by_key;
    for (const auto& r : right.rows) {
        Tuple key;
        for (const auto& [_, j] : shared) {
            key.push_back(r[j]);
        }
        by_key[std::move(key)].push_back(&r);
    }
    for (const auto& l : left.rows) {
        Tuple key;
        for (const auto& [i, _] : shared) {
            key.push_back(l[i]);
        }
        auto hit = by_key.find(key);
        if (hit == by_key.end()) {
            continue;
        }
        for (const Tuple* r : hit->second) {
            Tuple row = l;
            for (auto j : extra) {
                row.push_back((*r)[j]);
            }
            out.rows.insert(std::move(row));
        }
    }
    return out;
}

Atom ground_atom(const Atom& pattern, const std::map<std::string, Term>& env) {
    Atom a = pattern;
    for (auto& t : a.args) {
        if (t.is_variable()) {
            t = env.at(t.name);
        }
    }
    return a;
}

std::map<std::string, Term> head_env(const CoordinationRule& rule, const Tuple& assignment) {
    const auto xs = rule.distinguished_vars();
    std::map<std::string, Term> env;
    for (std::size_t i = 0; i < xs.size() && i < assignment.size(); ++i) {
        env[xs[i]] = assignment[i];
    }
    if (rule.head_kind == HeadKind::existential) {
        for (const auto& z : rule.existential_vars()) {
            env[z] = labeled_null(rule, assignment, z);
        }
    }
    return env;
}

std::vector<Term> state_domain(const P2PSystem& system, const Options& options) {
    auto dom = active_domain(system);
    dom.insert(dom.end(), options.extra_constants.begin(), options.extra_constants.end());
    std::sort(dom.begin(), dom.end());
    dom.erase(std::unique(dom.begin(), dom.end()), dom.end());
    return dom;
}

} // namespace

const NodeState& SystemState::node(const NodeId& id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) {
        throw Error("unknown node " + id);
    }
    return it->second;
}

SystemState initial_state(const P2PSystem& system, const Options& options) {
    SystemState state;
    state.domain = state_domain(system, options);
    for (const auto& [id, theory] : system.nodes) {
        state.nodes.emplace(id, NodeState{theory, nodekb::minimal_models(theory, options.kb)});
    }
    return state;
}

std::set<Tuple> join_body(const CoordinationRule& rule, const std::vector<std::set<Tuple>>& conjunct_relations) {
    VarRelation acc{{}, {Tuple{}}};
    for (std::size_t l = 0; l < rule.body.size() && !acc.rows.empty(); ++l) {
        acc = natural_join(acc, VarRelation{rule.conjunct_vars(l), conjunct_relations.at(l)});
    }
    const auto xs = rule.distinguished_vars();
    std::vector<std::size_t> proj;
    for (const auto& x : xs) {
        auto it = std::find(acc.vars.begin(), acc.vars.end(), x);
        proj.push_back(static_cast<std::size_t>(it - acc.vars.begin()));
    }
    std::set<Tuple> out;
    for (const auto& row : acc.rows) {
        Tuple t;
        t.reserve(proj.size());
        for (auto p : proj) {
            t.push_back(row[p]);
        }
        out.insert(std::move(t));
    }
    return out;
}

std::set<Tuple> certain_conjunct(const nodekb::NodeStatus& source, const CoordinationRule& rule, std::size_t index,
                                 const std::vector<Term>& domain) {
    const auto& conj = rule.body.at(index);
    const Query q{conj.source, rule.conjunct_vars(index), {conj.atoms}};
    auto out = nodekb::certain_relation(source, q, domain);
    std::erase_if(out, [](const Tuple& t) { return std::any_of(t.begin(), t.end(), [](const Term& x) { return x.is_null(); }); });
    return out;
}

std::set<Tuple> certain_body(const SystemState& state, const CoordinationRule& rule) {
    std::vector<std::set<Tuple>> relations;
    for (std::size_t l = 0; l < rule.body.size(); ++l) {
        relations.push_back(certain_conjunct(state.node(rule.body[l].source).status, rule, l, state.domain));
        if (relations.back().empty()) {
            return {};
        }
    }
    return join_body(rule, relations);
}

Term labeled_null(const CoordinationRule& rule, const Tuple& assignment, const std::string& var) {
    return Term::null("_:" + rule.id + "(" + to_string(assignment) + ")." + var);
}

bool apply_head(LocalTheory& theory, const CoordinationRule& rule, const Tuple& assignment) {
    const auto env = head_env(rule, assignment);
    if (rule.head_kind == HeadKind::disjunctive) {
        Clause c;
        for (const auto& h : rule.head) {
            c.atoms.insert(ground_atom(h, env));
        }
        return theory.add_clause(std::move(c));
    }
    bool changed = false;
    for (const auto& h : rule.head) {
        changed |= theory.add_fact(ground_atom(h, env));
    }
    return changed;
}

std::string head_text(const CoordinationRule& rule, const Tuple& assignment) {
    const auto env = head_env(rule, assignment);
    const char* sep = rule.head_kind == HeadKind::disjunctive ? " | " : " & ";
    std::string s;
    for (std::size_t i = 0; i < rule.head.size(); ++i) {
        s += (i ? sep : "") + to_string(ground_atom(rule.head[i], env));
    }
    return s;
}

void check_termination_fragment(const P2PSystem& system) {
    if (has_existential_heads(system) && !dependency_graph(system).acyclic) {
        throw FragmentError("existential link heads require an acyclic dependency graph");
    }
}

SystemState tmin_fixpoint(const P2PSystem& system, const Options& options) {
    check_termination_fragment(system);
    SystemState state = initial_state(system, options);

    std::vector<const CoordinationRule*> order;
    for (const auto& r : system.rules) {
        order.push_back(&r);
    }
    std::mt19937_64 rng(options.shuffle_seed.value_or(0));
    std::set<std::pair<std::string, Tuple>> fired;

    for (std::size_t iteration = 1;; ++iteration) {
        if (options.shuffle_seed) {
            std::shuffle(order.begin(), order.end(), rng);
        }
        std::vector<std::pair<const CoordinationRule*, std::set<Tuple>>> derived;
        for (const auto* rule : order) {
            derived.emplace_back(rule, certain_body(state, *rule));
        }
        std::sort(derived.begin(), derived.end(),
                  [](const auto& a, const auto& b) { return a.first->id < b.first->id; });

        std::set<NodeId> touched;
        for (const auto& [rule, assignments] : derived) {
            auto& target = state.nodes.at(rule->target);
            for (const auto& a : assignments) {
                if (fired.emplace(rule->id, a).second) {
                    state.trace.push_back({iteration, rule->id, a, head_text(*rule, a)});
                }
                if (apply_head(target.theory, *rule, a)) {
                    touched.insert(rule->target);
                }
            }
        }
        if (touched.empty()) {
            break;
        }
        for (const auto& id : touched) {
            auto& ns = state.nodes.at(id);
            ns.status = nodekb::minimal_models(ns.theory, options.kb);
        }
        state.iterations = iteration;
    }
    return state;
}

AnswerSet certain_answer(const SystemState& state, const Query& query) {
    return nodekb::certain_answers_local(state.node(query.node).status, query, state.domain);
}

std::string export_trace(const SystemState& state) {
    std::vector<std::pair<std::size_t, std::string>> lines;
    for (const auto& f : state.trace) {
        lines.emplace_back(f.iteration,
                           "iter=" + std::to_string(f.iteration) + " rule=" + f.rule_id + " head=" + f.head);
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& [_, l] : lines) {
        out += l + "\n";
    }
    return out;
}

bool same_knowledge(const SystemState& a, const SystemState& b) {
    return a.nodes == b.nodes;
}

} // namespace p2pdb::fixpoint

#include "p2pdb/oracle.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "p2pdb/errors.hpp"

namespace p2pdb::oracle {

namespace {

using Env = std::map<std::string, Term>;

/// Atom lookup for one node: universe index, falling back to "false".
class Valuation {
public:
    Valuation(const std::vector<Atom>& universe, std::uint32_t mask) : universe_(universe), mask_(mask) {}

    bool holds(const Atom& a) const {
        auto it = std::lower_bound(universe_.begin(), universe_.end(), a);
        if (it == universe_.end() || *it != a) {
            return false;
        }
        return (mask_ >> static_cast<std::size_t>(it - universe_.begin())) & 1U;
    }

private:
    const std::vector<Atom>& universe_;
    std::uint32_t mask_;
};

Atom bind(const Atom& a, const Env& env) {
    Atom out = a;
    for (auto& t : out.args) {
        if (t.is_variable()) {
            auto it = env.find(t.name);
            if (it != env.end()) {
                t = it->second;
            }
        }
    }
    return out;
}

/// Calls `visit` for every extension of `env` assigning `vars` over `domain`;
/// stops as soon as `visit` returns true and reports whether it did.
bool any_assignment(const std::vector<std::string>& vars, std::size_t i, Env& env, const std::vector<Term>& domain,
                    const std::function<bool(const Env&)>& visit) {
    if (i == vars.size()) {
        return visit(env);
    }
    for (const auto& c : domain) {
        env[vars[i]] = c;
        if (any_assignment(vars, i + 1, env, domain, visit)) {
            env.erase(vars[i]);
            return true;
        }
    }
    env.erase(vars[i]);
    return false;
}

std::vector<std::string> free_vars(const Conjunction& atoms, const Env& env) {
    std::vector<std::string> out;
    for (const auto& a : atoms) {
        for (const auto& t : a.args) {
            if (t.is_variable() && !env.contains(t.name) &&
                std::find(out.begin(), out.end(), t.name) == out.end()) {
                out.push_back(t.name);
            }
        }
    }
    return out;
}

/// Exists an extension of `env` over `domain` making every atom true.
bool exists_match(const Valuation& v, const Conjunction& atoms, const Env& env, const std::vector<Term>& domain) {
    Env e = env;
    return any_assignment(free_vars(atoms, env), 0, e, domain, [&](const Env& full) {
        return std::all_of(atoms.begin(), atoms.end(), [&](const Atom& a) { return v.holds(bind(a, full)); });
    });
}

bool satisfies_theory(const Valuation& v, const LocalTheory& theory, const std::vector<Term>& domain) {
    if (theory.falsum) {
        return false;
    }
    for (const auto& f : theory.facts) {
        if (!v.holds(f)) {
            return false;
        }
    }
    for (const auto& c : theory.clauses) {
        if (std::none_of(c.atoms.begin(), c.atoms.end(), [&](const Atom& a) { return v.holds(a); })) {
            return false;
        }
    }
    for (const auto& d : theory.denials) {
        if (exists_match(v, d.body, {}, domain)) {
            return false;
        }
    }
    for (const auto& r : theory.rules) {
        Env env;
        const bool broken = any_assignment(free_vars(r.body, {}), 0, env, domain, [&](const Env& full) {
            const bool body = std::all_of(r.body.begin(), r.body.end(), [&](const Atom& a) { return v.holds(bind(a, full)); });
            return body && !v.holds(bind(r.head, full));
        });
        if (broken) {
            return false;
        }
    }
    return true;
}

bool satisfies_formulas(const Valuation& v, const std::vector<Formula>& formulas) {
    return std::all_of(formulas.begin(), formulas.end(), [&](const Formula& f) {
        return evaluate(f, [&](const Atom& a) { return v.holds(a); });
    });
}

void add_signature(Signature& sig, const Atom& a) {
    sig.emplace(a.key(), a.arity());
}

std::vector<Atom> ground_universe(const NodeId& node, const Signature& sig, const std::vector<Term>& domain,
                                  std::size_t cap) {
    std::vector<Atom> out;
    for (const auto& [key, arity] : sig) {
        if (key.node != node) {
            continue;
        }
        std::vector<std::size_t> idx(arity, 0);
        if (arity > 0 && domain.empty()) {
            continue;
        }
        while (true) {
            Atom a{key.node, key.name, {}};
            for (auto i : idx) {
                a.args.push_back(domain[i]);
            }
            out.push_back(std::move(a));
            if (out.size() > cap) {
                throw CapExceeded("universe-too-large: node " + node + " has more than " + std::to_string(cap) +
                                  " ground atoms");
            }
            std::size_t k = arity;
            while (k > 0 && ++idx[k - 1] == domain.size()) {
                idx[--k] = 0;
            }
            if (k == 0) {
                break;
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Signature theory_signature(const LocalTheory& theory) {
    Signature sig;
    for (const auto& f : theory.facts) {
        add_signature(sig, f);
    }
    for (const auto& r : theory.rules) {
        add_signature(sig, r.head);
        for (const auto& b : r.body) {
            add_signature(sig, b);
        }
    }
    for (const auto& c : theory.clauses) {
        for (const auto& a : c.atoms) {
            add_signature(sig, a);
        }
    }
    for (const auto& d : theory.denials) {
        for (const auto& a : d.body) {
            add_signature(sig, a);
        }
    }
    return sig;
}

InterpretationSet enumerate_set(const LocalTheory& theory, const std::vector<Term>& domain,
                                const std::vector<Formula>& formulas, Signature sig, std::size_t cap) {
    for (const auto& [k, a] : theory_signature(theory)) {
        sig.emplace(k, a);
    }
    std::vector<Atom> atoms;
    for (const auto& f : formulas) {
        collect_atoms(f, atoms);
    }
    for (const auto& a : atoms) {
        add_signature(sig, a);
    }
    InterpretationSet set{theory.node, ground_universe(theory.node, sig, domain, cap), {}};
    const std::uint64_t count = std::uint64_t{1} << set.universe.size();
    for (std::uint64_t m = 0; m < count; ++m) {
        const Valuation v(set.universe, static_cast<std::uint32_t>(m));
        if (satisfies_theory(v, theory, domain) && satisfies_formulas(v, formulas)) {
            set.interps.push_back(static_cast<std::uint32_t>(m));
        }
    }
    return set;
}

bool head_holds(const Valuation& v, const CoordinationRule& rule, const Env& env, const std::vector<Term>& domain) {
    if (rule.head_kind == HeadKind::disjunctive) {
        return std::any_of(rule.head.begin(), rule.head.end(), [&](const Atom& a) { return v.holds(bind(a, env)); });
    }
    return exists_match(v, rule.head, env, domain);
}

bool all_interps(const InterpretationSet& set, const std::function<bool(const Valuation&)>& pred) {
    return std::all_of(set.interps.begin(), set.interps.end(),
                       [&](std::uint32_t m) { return pred(Valuation(set.universe, m)); });
}

/// Body variables shared with the head or between conjuncts.
std::vector<std::string> rule_frontier(const CoordinationRule& rule) {
    std::map<std::string, int> seen_in;
    std::set<std::string> head_vars;
    for (const auto& h : rule.head) {
        for (const auto& t : h.args) {
            if (t.is_variable()) {
                head_vars.insert(t.name);
            }
        }
    }
    std::vector<std::string> order;
    for (const auto& c : rule.body) {
        std::set<std::string> local;
        for (const auto& a : c.atoms) {
            for (const auto& t : a.args) {
                if (t.is_variable() && local.insert(t.name).second) {
                    ++seen_in[t.name];
                    if (std::find(order.begin(), order.end(), t.name) == order.end()) {
                        order.push_back(t.name);
                    }
                }
            }
        }
    }
    std::vector<std::string> out;
    for (const auto& v : order) {
        if (head_vars.contains(v) || seen_in[v] > 1) {
            out.push_back(v);
        }
    }
    return out;
}

bool body_certain(const OracleState& state, const CoordinationRule& rule, const Env& env) {
    return std::all_of(rule.body.begin(), rule.body.end(), [&](const BodyConjunct& c) {
        const auto& set = state.nodes.at(c.source);
        return all_interps(set, [&](const Valuation& v) { return exists_match(v, c.atoms, env, state.domain); });
    });
}

void refresh_no_model(OracleState& state) {
    if (state.mode == Mode::local) {
        state.no_model = state.no_model || std::any_of(state.nodes.begin(), state.nodes.end(),
                                                       [](const auto& kv) { return kv.second.empty(); });
    }
}

std::set<Term> formula_constants(const std::map<NodeId, std::vector<Formula>>& formulas) {
    std::set<Term> out;
    for (const auto& [_, fs] : formulas) {
        std::vector<Atom> atoms;
        for (const auto& f : fs) {
            collect_atoms(f, atoms);
        }
        for (const auto& a : atoms) {
            for (const auto& t : a.args) {
                if (t.is_constant()) {
                    out.insert(t);
                }
            }
        }
    }
    return out;
}

} // namespace

bool InterpretationSet::holds(std::uint32_t interp, const Atom& atom) const {
    return Valuation(universe, interp).holds(atom);
}

nodekb::HerbrandInterpretation InterpretationSet::decode(std::uint32_t interp) const {
    nodekb::HerbrandInterpretation out{node, {}};
    for (std::size_t i = 0; i < universe.size(); ++i) {
        if ((interp >> i) & 1U) {
            out.true_atoms.insert(universe[i]);
        }
    }
    return out;
}

std::vector<nodekb::HerbrandInterpretation> enumerate_interpretations(const LocalTheory& theory,
                                                                      const std::vector<Term>& domain,
                                                                      const std::vector<Formula>& extra_formulas,
                                                                      const Signature& extra_predicates,
                                                                      std::size_t cap) {
    std::vector<Formula> ground_fs;
    for (const auto& f : extra_formulas) {
        ground_fs.push_back(ground(f, domain));
    }
    const auto set = enumerate_set(theory, domain, ground_fs, extra_predicates, cap);
    std::vector<nodekb::HerbrandInterpretation> out;
    for (auto m : set.interps) {
        out.push_back(set.decode(m));
    }
    return out;
}

OracleState initial_state(const P2PSystem& system, const Config& config) {
    OracleState state;
    state.mode = config.mode;

    std::set<Term> constants;
    for (const auto& c : active_domain(system)) {
        constants.insert(c);
    }
    constants.merge(formula_constants(config.extra_formulas));
    state.constants.assign(constants.begin(), constants.end());
    state.domain = state.constants;
    for (std::size_t k = 1; k <= config.extra_domain; ++k) {
        Term fresh = Term::constant("_fresh" + std::to_string(k));
        while (constants.contains(fresh)) {
            fresh.name += "_";
        }
        state.domain.push_back(fresh);
    }
    std::sort(state.domain.begin(), state.domain.end());

    Signature sig = config.extra_predicates;
    for (const auto& rule : system.rules) {
        for (const auto& c : rule.body) {
            for (const auto& a : c.atoms) {
                add_signature(sig, a);
            }
        }
        for (const auto& a : rule.head) {
            add_signature(sig, a);
        }
    }

    for (const auto& [id, theory] : system.nodes) {
        std::vector<Formula> fs;
        if (auto it = config.extra_formulas.find(id); it != config.extra_formulas.end()) {
            for (const auto& f : it->second) {
                fs.push_back(ground(f, state.domain));
            }
        }
        state.nodes.emplace(id, enumerate_set(theory, state.domain, fs, sig, config.universe_cap));
        state.ground_formulas.emplace(id, std::move(fs));
    }
    refresh_no_model(state);
    return state;
}

OracleState tmdb_step(const OracleState& state, const std::vector<CoordinationRule>& rules) {
    OracleState next = state;
    for (const auto& rule : rules) {
        const auto xs = rule_frontier(rule);
        auto& target = next.nodes.at(rule.target);
        Env env;
        any_assignment(xs, 0, env, state.domain, [&](const Env& full) {
            if (body_certain(state, rule, full)) {
                std::erase_if(target.interps, [&](std::uint32_t m) {
                    return !head_holds(Valuation(target.universe, m), rule, full, state.domain);
                });
            }
            return false;
        });
    }
    refresh_no_model(next);
    return next;
}

OracleState tmdb_fixpoint(const P2PSystem& system, const Config& config) {
    OracleState state = initial_state(system, config);
    while (true) {
        OracleState next = tmdb_step(state, system.rules);
        if (next == state) {
            return state;
        }
        state = std::move(next);
    }
}

Answer oracle_certain_answer(const OracleState& state, const Query& query) {
    Answer out;
    std::vector<Tuple> candidates;
    {
        std::vector<std::size_t> idx(query.arity(), 0);
        const auto& c = state.constants;
        if (query.arity() == 0 || !c.empty()) {
            while (true) {
                Tuple t;
                for (auto i : idx) {
                    t.push_back(c[i]);
                }
                candidates.push_back(std::move(t));
                std::size_t k = idx.size();
                while (k > 0 && ++idx[k - 1] == c.size()) {
                    idx[--k] = 0;
                }
                if (k == 0) {
                    break;
                }
            }
        }
    }
    auto it = state.nodes.find(query.node);
    if (it == state.nodes.end()) {
        throw Error("unknown node " + query.node);
    }
    const auto& set = it->second;
    if ((state.mode == Mode::local && state.no_model) || set.empty()) {
        out.all = state.mode == Mode::local && state.no_model;
        out.tuples.insert(candidates.begin(), candidates.end());
        return out;
    }
    for (const auto& t : candidates) {
        Env env;
        for (std::size_t i = 0; i < t.size(); ++i) {
            env[query.answer_vars[i]] = t[i];
        }
        const bool certain = all_interps(set, [&](const Valuation& v) {
            return std::any_of(query.disjuncts.begin(), query.disjuncts.end(),
                               [&](const Conjunction& d) { return exists_match(v, d, env, state.domain); });
        });
        if (certain) {
            out.tuples.insert(t);
        }
    }
    return out;
}

bool check_global_model(const OracleState& state, const P2PSystem& system) {
    if (state.mode == Mode::local && state.no_model) {
        return false;
    }
    for (const auto& [id, set] : state.nodes) {
        if (state.mode == Mode::local && set.empty()) {
            return false;
        }
        const auto& theory = system.nodes.at(id);
        static const std::vector<Formula> none;
        auto fit = state.ground_formulas.find(id);
        const auto& fs = fit == state.ground_formulas.end() ? none : fit->second;
        const bool local_ok = all_interps(set, [&](const Valuation& v) {
            return satisfies_theory(v, theory, state.domain) && satisfies_formulas(v, fs);
        });
        if (!local_ok) {
            return false;
        }
    }
    for (const auto& rule : system.rules) {
        const auto& target = state.nodes.at(rule.target);
        Env env;
        const bool violated = any_assignment(rule_frontier(rule), 0, env, state.domain, [&](const Env& full) {
            return body_certain(state, rule, full) &&
                   !all_interps(target, [&](const Valuation& v) { return head_holds(v, rule, full, state.domain); });
        });
        if (violated) {
            return false;
        }
    }
    return true;
}

Signature signature_of(const std::vector<Query>& queries) {
    Signature sig;
    for (const auto& q : queries) {
        for (const auto& d : q.disjuncts) {
            for (const auto& a : d) {
                add_signature(sig, a);
            }
        }
    }
    return sig;
}

} // namespace p2pdb::oracle

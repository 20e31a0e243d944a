#include "p2pdb/formula.hpp"

#include <algorithm>
#include <map>

#include "p2pdb/errors.hpp"

namespace p2pdb {

Formula Formula::make_atom(Atom a) {
    Formula f;
    f.kind = Kind::atom;
    f.atom = std::move(a);
    return f;
}

Formula Formula::negate(Formula inner) {
    Formula f;
    f.kind = Kind::negation;
    f.children.push_back(std::move(inner));
    return f;
}

Formula Formula::all_of(std::vector<Formula> fs) {
    Formula f;
    f.kind = Kind::conjunction;
    f.children = std::move(fs);
    return f;
}

Formula Formula::any_of(std::vector<Formula> fs) {
    Formula f;
    f.kind = Kind::disjunction;
    f.children = std::move(fs);
    return f;
}

Formula Formula::exists(std::string var, Formula body) {
    Formula f;
    f.kind = Kind::exists;
    f.bound_var = std::move(var);
    f.children.push_back(std::move(body));
    return f;
}

Formula Formula::forall(std::string var, Formula body) {
    Formula f;
    f.kind = Kind::forall;
    f.bound_var = std::move(var);
    f.children.push_back(std::move(body));
    return f;
}

bool Formula::is_ground() const {
    switch (kind) {
    case Kind::atom:
        return atom.is_ground();
    case Kind::exists:
    case Kind::forall:
        return false;
    default:
        return std::all_of(children.begin(), children.end(), [](const Formula& c) { return c.is_ground(); });
    }
}

namespace {

Formula substitute(const Formula& f, const std::map<std::string, Term>& env, const std::vector<Term>& domain) {
    switch (f.kind) {
    case Formula::Kind::atom: {
        Atom a = f.atom;
        for (auto& t : a.args) {
            if (t.is_variable()) {
                auto it = env.find(t.name);
                if (it == env.end()) {
                    throw Error("formula has free variable " + t.name);
                }
                t = it->second;
            }
        }
        return Formula::make_atom(std::move(a));
    }
    case Formula::Kind::negation:
        return Formula::negate(substitute(f.children.front(), env, domain));
    case Formula::Kind::conjunction:
    case Formula::Kind::disjunction: {
        std::vector<Formula> cs;
        for (const auto& c : f.children) {
            cs.push_back(substitute(c, env, domain));
        }
        return f.kind == Formula::Kind::conjunction ? Formula::all_of(std::move(cs)) : Formula::any_of(std::move(cs));
    }
    case Formula::Kind::exists:
    case Formula::Kind::forall: {
        std::vector<Formula> cs;
        for (const auto& c : domain) {
            auto inner = env;
            inner[f.bound_var] = c;
            cs.push_back(substitute(f.children.front(), inner, domain));
        }
        return f.kind == Formula::Kind::exists ? Formula::any_of(std::move(cs)) : Formula::all_of(std::move(cs));
    }
    }
    return f;
}

} // namespace

Formula ground(const Formula& formula, const std::vector<Term>& domain) {
    return substitute(formula, {}, domain);
}

bool evaluate(const Formula& f, const std::function<bool(const Atom&)>& holds) {
    switch (f.kind) {
    case Formula::Kind::atom:
        return holds(f.atom);
    case Formula::Kind::negation:
        return !evaluate(f.children.front(), holds);
    case Formula::Kind::conjunction:
        return std::all_of(f.children.begin(), f.children.end(), [&](const Formula& c) { return evaluate(c, holds); });
    case Formula::Kind::disjunction:
        return std::any_of(f.children.begin(), f.children.end(), [&](const Formula& c) { return evaluate(c, holds); });
    case Formula::Kind::exists:
    case Formula::Kind::forall:
        throw Error("cannot evaluate a quantified formula; ground it first");
    }
    return false;
}

void collect_atoms(const Formula& f, std::vector<Atom>& out) {
    if (f.kind == Formula::Kind::atom) {
        out.push_back(f.atom);
    }
    for (const auto& c : f.children) {
        collect_atoms(c, out);
    }
}

std::string to_string(const Formula& f) {
    auto join = [&](const char* sep) {
        std::string s = "(";
        for (std::size_t i = 0; i < f.children.size(); ++i) {
            s += (i ? sep : "") + to_string(f.children[i]);
        }
        return s + ")";
    };
    switch (f.kind) {
    case Formula::Kind::atom:
        return to_string(f.atom);
    case Formula::Kind::negation:
        return "!" + to_string(f.children.front());
    case Formula::Kind::conjunction:
        return f.children.empty() ? "true" : join(" & ");
    case Formula::Kind::disjunction:
        return f.children.empty() ? "false" : join(" | ");
    case Formula::Kind::exists:
        return "exists " + f.bound_var + ". " + to_string(f.children.front());
    case Formula::Kind::forall:
        return "forall " + f.bound_var + ". " + to_string(f.children.front());
    }
    return {};
}

} // namespace p2pdb

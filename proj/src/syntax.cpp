#include "p2pdb/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "p2pdb/errors.hpp"

namespace p2pdb {

namespace {

enum class Tok { ident, string, symbol, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

bool ident_start(unsigned char c) { return std::isalnum(c) || c == '_'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '-'; }

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t line = 1;
    std::size_t col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        const unsigned char c = static_cast<unsigned char>(src[i]);
        if (std::isspace(c)) {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') {
                advance(1);
            }
            continue;
        }
        Token tok;
        tok.line = line;
        tok.column = col;
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && ident_char(static_cast<unsigned char>(src[j]))) {
                ++j;
            }
            // A trailing '-' belongs to a following ":-" or "->", never to the name.
            while (j > i + 1 && src[j - 1] == '-') {
                --j;
            }
            tok.kind = Tok::ident;
            tok.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (c == '"') {
            tok.kind = Tok::string;
            advance(1);
            while (true) {
                if (i >= src.size() || src[i] == '\n') {
                    throw ParseError(tok.line, tok.column, "unterminated string");
                }
                if (src[i] == '"') {
                    advance(1);
                    break;
                }
                if (src[i] == '\\' && i + 1 < src.size()) {
                    advance(1);
                }
                tok.text += src[i];
                advance(1);
            }
        } else {
            static const std::pair<std::string_view, std::string_view> multi[] = {
                {":-", ":-"}, {"=>", "=>"}, {"\xE2\x88\xA8", "|"}, {"\xE2\x88\xA7", "&"}, {"\xC2\xAC", "!"}};
            bool matched = false;
            for (const auto& [spelling, canonical] : multi) {
                if (src.substr(i, spelling.size()) == spelling) {
                    tok.kind = Tok::symbol;
                    tok.text = std::string(canonical);
                    advance(spelling.size());
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                if (std::string_view("{}(),.:|&![]@").find(static_cast<char>(c)) == std::string_view::npos) {
                    throw ParseError(line, col, std::string("unexpected character '") + static_cast<char>(c) + "'");
                }
                tok.kind = Tok::symbol;
                tok.text = std::string(1, static_cast<char>(c));
                advance(1);
            }
        }
        out.push_back(std::move(tok));
    }
    Token end;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

enum class TermMode { ground, pattern, formula };

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    bool at_end() const { return peek().kind == Tok::end; }

    bool is_symbol(const char* s, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::symbol && peek(ahead).text == s;
    }
    bool is_keyword(const char* s) const { return peek().kind == Tok::ident && peek().text == s; }

    [[noreturn]] void fail(const Token& at, const std::string& msg) const { throw ParseError(at.line, at.column, msg); }

    const Token& next() {
        const Token& t = toks_[pos_];
        if (t.kind != Tok::end) {
            ++pos_;
        }
        return t;
    }

    void expect_symbol(const char* s) {
        if (!is_symbol(s)) {
            fail(peek(), std::string("expected '") + s + "'" + found());
        }
        next();
    }

    std::string expect_ident(const char* what) {
        if (peek().kind != Tok::ident) {
            fail(peek(), std::string("expected ") + what + found());
        }
        return next().text;
    }

    std::string found() const {
        if (at_end()) {
            return " but reached end of input";
        }
        return " but found '" + peek().text + "'";
    }

    Term parse_term(TermMode mode, const std::set<std::string>& bound = {}) {
        const Token& t = peek();
        if (t.kind == Tok::string) {
            next();
            return Term::constant(t.text);
        }
        if (t.kind != Tok::ident) {
            fail(t, "expected a term" + found());
        }
        next();
        const bool lower = std::islower(static_cast<unsigned char>(t.text.front()));
        switch (mode) {
        case TermMode::ground:
            return Term::constant(t.text);
        case TermMode::pattern:
            return lower ? Term::variable(t.text) : Term::constant(t.text);
        case TermMode::formula:
            return bound.contains(t.text) ? Term::variable(t.text) : Term::constant(t.text);
        }
        return Term::constant(t.text);
    }

    /// `Pred(args)` or `Pred`, optionally qualified `node:Pred(args)`.
    Atom parse_atom(const std::optional<NodeId>& implicit_node, TermMode mode, const std::set<std::string>& bound = {}) {
        const Token start = peek();
        Atom a;
        if (peek().kind == Tok::ident && is_symbol(":", 1)) {
            a.node = next().text;
            next();
            if (implicit_node && a.node != *implicit_node) {
                fail(start, "atom qualified with node " + a.node + " inside node " + *implicit_node);
            }
        } else if (implicit_node) {
            a.node = *implicit_node;
        } else {
            fail(start, "expected a node-qualified atom <node>:<predicate>(...)" + found());
        }
        a.predicate = expect_ident("a predicate name");
        if (is_symbol("(")) {
            next();
            if (!is_symbol(")")) {
                a.args.push_back(parse_term(mode, bound));
                while (is_symbol(",")) {
                    next();
                    a.args.push_back(parse_term(mode, bound));
                }
            }
            expect_symbol(")");
        }
        record_arity(a, start);
        return a;
    }

    void record_arity(const Atom& a, const Token& at) {
        auto [it, inserted] = arities_.emplace(a.key(), a.arity());
        if (!inserted && it->second != a.arity()) {
            fail(at, "arity mismatch: " + a.node + ":" + a.predicate + " has arity " + std::to_string(it->second) +
                         ", used here with " + std::to_string(a.arity()));
        }
    }

    Conjunction parse_conjunction(const NodeId& node, TermMode mode) {
        Conjunction out{parse_atom(node, mode)};
        while (is_symbol(",") || is_symbol("&")) {
            next();
            out.push_back(parse_atom(node, mode));
        }
        return out;
    }

    P2PSystem parse_network() {
        P2PSystem sys;
        struct PendingLink {
            Token at;
            CoordinationRule rule;
            bool explicit_id;
            std::vector<std::pair<NodeId, Token>> refs;
        };
        std::vector<PendingLink> links;
        while (!at_end()) {
            if (is_keyword("node")) {
                next();
                const Token id_tok = peek();
                NodeId id = expect_ident("a node id");
                if (sys.nodes.contains(id)) {
                    fail(id_tok, "node " + id + " declared twice");
                }
                sys.nodes[id] = parse_node_body(id);
            } else if (is_keyword("link")) {
                const Token at = next();
                bool explicit_id = false;
                CoordinationRule rule;
                if (is_symbol("@")) {
                    next();
                    rule.id = expect_ident("a link id");
                    explicit_id = true;
                }
                std::vector<std::pair<NodeId, Token>> refs;
                parse_link_body(rule, at, refs);
                links.push_back({at, std::move(rule), explicit_id, std::move(refs)});
            } else {
                fail(peek(), "expected 'node' or 'link'" + found());
            }
        }

        std::set<std::string> used;
        for (const auto& l : links) {
            if (l.explicit_id && !used.insert(l.rule.id).second) {
                fail(l.at, "duplicate link id " + l.rule.id);
            }
        }
        std::size_t counter = 0;
        for (auto& l : links) {
            if (!l.explicit_id) {
                do {
                    l.rule.id = "r" + std::to_string(++counter);
                } while (used.contains(l.rule.id));
                used.insert(l.rule.id);
            }
            for (const auto& [node, tok] : l.refs) {
                if (!sys.nodes.contains(node)) {
                    fail(tok, "unknown node id " + node);
                }
            }
            sys.rules.push_back(std::move(l.rule));
        }
        return sys;
    }

    LocalTheory parse_node_body(const NodeId& id) {
        LocalTheory th;
        th.node = id;
        expect_symbol("{");
        while (!is_symbol("}")) {
            const Token at = peek();
            const std::string kw = expect_ident("a statement keyword");
            if (kw == "fact") {
                Atom a = parse_atom(id, TermMode::ground);
                th.facts.insert(std::move(a));
            } else if (kw == "rule") {
                DefiniteRule r;
                r.head = parse_atom(id, TermMode::pattern);
                expect_symbol(":-");
                r.body = parse_conjunction(id, TermMode::pattern);
                th.rules.push_back(std::move(r));
            } else if (kw == "clause") {
                Clause c;
                c.atoms.insert(parse_atom(id, TermMode::ground));
                while (is_symbol("|")) {
                    next();
                    c.atoms.insert(parse_atom(id, TermMode::ground));
                }
                th.clauses.insert(std::move(c));
            } else if (kw == "denial") {
                expect_symbol(":-");
                th.denials.push_back({parse_conjunction(id, TermMode::pattern)});
            } else if (kw == "inconsistent") {
                th.falsum = true;
            } else {
                fail(at, "unknown statement '" + kw + "'");
            }
            expect_symbol(".");
        }
        expect_symbol("}");
        return th;
    }

    void parse_link_body(CoordinationRule& rule, const Token& at, std::vector<std::pair<NodeId, Token>>& refs) {
        auto atom = [&] {
            const Token tok = peek();
            Atom a = parse_atom(std::nullopt, TermMode::pattern);
            refs.emplace_back(a.node, tok);
            return a;
        };
        std::vector<Atom> body{atom()};
        while (is_symbol("&") || is_symbol(",")) {
            next();
            body.push_back(atom());
        }
        expect_symbol("=>");
        const Token head_tok = peek();
        rule.head.push_back(atom());
        std::optional<std::string> sep;
        while (is_symbol("|") || is_symbol("&") || is_symbol(",")) {
            std::string s = next().text == "|" ? "|" : "&";
            if (sep && *sep != s) {
                fail(head_tok, "link head mixes conjunction and disjunction");
            }
            sep = s;
            rule.head.push_back(atom());
        }
        expect_symbol(".");

        for (auto& a : body) {
            auto it = std::find_if(rule.body.begin(), rule.body.end(),
                                   [&](const BodyConjunct& c) { return c.source == a.node; });
            if (it == rule.body.end()) {
                rule.body.push_back({a.node, {std::move(a)}});
            } else {
                it->atoms.push_back(std::move(a));
            }
        }
        rule.target = rule.head.front().node;
        for (const auto& h : rule.head) {
            if (h.node != rule.target) {
                fail(head_tok, "all head atoms of a link must be at one node");
            }
        }
        for (const auto& c : rule.body) {
            if (c.source == rule.target) {
                fail(at, "link node indices must be pairwise distinct: node " + c.source +
                             " appears in both body and head");
            }
        }
        rule.head_kind = HeadKind::conjunctive;
        if (sep == "|") {
            rule.head_kind = HeadKind::disjunctive;
        }
        if (!rule.existential_vars().empty()) {
            if (rule.head_kind == HeadKind::disjunctive) {
                fail(head_tok, "disjunctive link heads may only use body variables");
            }
            rule.head_kind = HeadKind::existential;
        }
    }

    NodeId parse_node_prefix() {
        NodeId node = expect_ident("a node id");
        expect_symbol(":");
        return node;
    }

    Query parse_query() {
        Query q;
        q.node = parse_node_prefix();
        bool explicit_vars = false;
        if (is_symbol("[")) {
            next();
            explicit_vars = true;
            if (!is_symbol("]")) {
                q.answer_vars.push_back(expect_ident("a variable"));
                while (is_symbol(",")) {
                    next();
                    q.answer_vars.push_back(expect_ident("a variable"));
                }
            }
            expect_symbol("]");
        }
        do {
            if (!q.disjuncts.empty()) {
                next();
            }
            Conjunction conj;
            do {
                if (!conj.empty()) {
                    next();
                }
                if (is_symbol("!") || is_keyword("not")) {
                    throw FragmentError("only positive queries (unions of conjunctive queries) are supported");
                }
                conj.push_back(parse_atom(q.node, TermMode::pattern));
            } while (is_symbol("&") || is_symbol(","));
            q.disjuncts.push_back(std::move(conj));
        } while (is_symbol("|"));
        if (!at_end()) {
            if (is_symbol("!")) {
                throw FragmentError("only positive queries (unions of conjunctive queries) are supported");
            }
            fail(peek(), "unexpected trailing input" + found());
        }
        if (!explicit_vars) {
            q.answer_vars = variables_of(q.disjuncts.front());
        }
        for (const auto& v : q.answer_vars) {
            if (!std::islower(static_cast<unsigned char>(v.front()))) {
                fail(toks_.front(), "answer variable " + v + " must start with a lowercase letter");
            }
        }
        auto violations = validate(q);
        if (!violations.empty()) {
            fail(toks_.front(), violations.front().invariant);
        }
        return q;
    }

    Formula parse_formula(const NodeId& node, std::set<std::string>& bound) {
        if (is_keyword("exists") || is_keyword("forall")) {
            const bool ex = next().text == "exists";
            std::string var = expect_ident("a variable");
            expect_symbol(".");
            const bool fresh = bound.insert(var).second;
            Formula body = parse_formula(node, bound);
            if (fresh) {
                bound.erase(var);
            }
            return ex ? Formula::exists(var, std::move(body)) : Formula::forall(var, std::move(body));
        }
        std::vector<Formula> disj{parse_conj(node, bound)};
        while (is_symbol("|")) {
            next();
            disj.push_back(parse_conj(node, bound));
        }
        return disj.size() == 1 ? std::move(disj.front()) : Formula::any_of(std::move(disj));
    }

    Formula parse_conj(const NodeId& node, std::set<std::string>& bound) {
        std::vector<Formula> conj{parse_unary(node, bound)};
        while (is_symbol("&")) {
            next();
            conj.push_back(parse_unary(node, bound));
        }
        return conj.size() == 1 ? std::move(conj.front()) : Formula::all_of(std::move(conj));
    }

    Formula parse_unary(const NodeId& node, std::set<std::string>& bound) {
        if (is_symbol("!") || is_keyword("not")) {
            next();
            return Formula::negate(parse_unary(node, bound));
        }
        if (is_symbol("(")) {
            next();
            Formula f = parse_formula(node, bound);
            expect_symbol(")");
            return f;
        }
        if (is_keyword("exists") || is_keyword("forall")) {
            return parse_formula(node, bound);
        }
        return Formula::make_atom(parse_atom(node, TermMode::formula, bound));
    }

    NodeFormula parse_node_formula() {
        NodeFormula nf;
        nf.node = parse_node_prefix();
        std::set<std::string> bound;
        nf.formula = parse_formula(nf.node, bound);
        if (!at_end()) {
            fail(peek(), "unexpected trailing input" + found());
        }
        return nf;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::map<PredicateKey, std::size_t> arities_;
};

bool plain_ident(const std::string& s) {
    if (s.empty() || !ident_start(static_cast<unsigned char>(s.front())) || s.back() == '-') {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](char c) { return ident_char(static_cast<unsigned char>(c)); });
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out + "\"";
}

std::string term_text(const Term& t, TermMode mode) {
    if (t.is_variable()) {
        return t.name;
    }
    const bool lower = !t.name.empty() && std::islower(static_cast<unsigned char>(t.name.front()));
    if (plain_ident(t.name) && (mode == TermMode::ground || !lower)) {
        return t.name;
    }
    return quoted(t.name);
}

std::string atom_text(const Atom& a, TermMode mode, bool qualified) {
    std::string s = qualified ? a.node + ":" : "";
    s += a.predicate + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        s += (i ? "," : "") + term_text(a.args[i], mode);
    }
    return s + ")";
}

} // namespace

P2PSystem parse_network(std::string_view text) {
    return Parser(text).parse_network();
}

Query parse_query(std::string_view text) {
    return Parser(text).parse_query();
}

NodeFormula parse_formula(std::string_view text) {
    return Parser(text).parse_node_formula();
}

std::string serialize(const P2PSystem& system) {
    std::ostringstream os;
    for (const auto& [id, th] : system.nodes) {
        os << "node " << id << " {\n";
        for (const auto& f : th.facts) {
            os << "  fact " << atom_text(f, TermMode::ground, false) << ".\n";
        }
        for (const auto& r : th.rules) {
            os << "  rule " << atom_text(r.head, TermMode::pattern, false) << " :- ";
            for (std::size_t i = 0; i < r.body.size(); ++i) {
                os << (i ? ", " : "") << atom_text(r.body[i], TermMode::pattern, false);
            }
            os << ".\n";
        }
        for (const auto& c : th.clauses) {
            os << "  clause ";
            bool first = true;
            for (const auto& a : c.atoms) {
                os << (first ? "" : " | ") << atom_text(a, TermMode::ground, false);
                first = false;
            }
            os << ".\n";
        }
        for (const auto& d : th.denials) {
            os << "  denial :- ";
            for (std::size_t i = 0; i < d.body.size(); ++i) {
                os << (i ? ", " : "") << atom_text(d.body[i], TermMode::pattern, false);
            }
            os << ".\n";
        }
        if (th.falsum) {
            os << "  inconsistent.\n";
        }
        os << "}\n";
    }
    for (const auto& r : system.rules) {
        os << "link @" << r.id << " ";
        bool first = true;
        for (const auto& c : r.body) {
            for (const auto& a : c.atoms) {
                os << (first ? "" : " & ") << atom_text(a, TermMode::pattern, true);
                first = false;
            }
        }
        os << " => ";
        const char* sep = r.head_kind == HeadKind::disjunctive ? " | " : " & ";
        for (std::size_t i = 0; i < r.head.size(); ++i) {
            os << (i ? sep : "") << atom_text(r.head[i], TermMode::pattern, true);
        }
        os << ".\n";
    }
    return os.str();
}

} // namespace p2pdb

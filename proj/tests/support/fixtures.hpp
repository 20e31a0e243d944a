#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "p2pdb/model.hpp"
#include "p2pdb/syntax.hpp"

namespace p2pdb {

inline void PrintTo(const Term& t, std::ostream* os) { *os << to_string(t); }
inline void PrintTo(const Atom& a, std::ostream* os) { *os << to_string(a); }

} // namespace p2pdb

namespace p2pdb::testfx {

inline std::string read_example(const std::string& name) {
    std::ifstream in(std::string(P2PDB_EXAMPLES_DIR) + "/" + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline P2PSystem citizen() { return parse_network(read_example("citizen.p2p")); }
inline P2PSystem example1() { return parse_network(read_example("example1.p2p")); }

inline Term c(const std::string& name) { return Term::constant(name); }
inline Term v(const std::string& name) { return Term::variable(name); }

/// {(a), (b), ...}
inline AnswerSet unary(std::initializer_list<const char*> names) {
    AnswerSet out;
    for (const char* n : names) {
        out.insert(Tuple{c(n)});
    }
    return out;
}

inline std::vector<Term> domain(std::initializer_list<const char*> names) {
    std::vector<Term> out;
    for (const char* n : names) {
        out.push_back(c(n));
    }
    return out;
}

} // namespace p2pdb::testfx

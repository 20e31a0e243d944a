#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "p2pdb/acyclic.hpp"
#include "p2pdb/compiler.hpp"
#include "p2pdb/distsim.hpp"
#include "p2pdb/errors.hpp"
#include "p2pdb/fixpoint.hpp"
#include "p2pdb/oracle.hpp"
#include "p2pdb/syntax.hpp"

using namespace p2pdb;

namespace {

enum Exit { ok = 0, usage = 1, fragment = 2, disagreement = 3 };

struct FileError : Error {
    using Error::Error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FileError("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

P2PSystem load(const std::string& path) {
    try {
        return parse_network(read_file(path));
    } catch (const ParseError& e) {
        throw FileError(path + ":" + e.what());
    }
}

std::string tuple_line(const Tuple& t) {
    std::string s;
    for (std::size_t i = 0; i < t.size(); ++i) {
        s += (i ? "," : "") + t[i].name;
    }
    return s;
}

void print_answers(const AnswerSet& answers) {
    std::vector<std::string> lines;
    for (const auto& t : answers) {
        lines.push_back(tuple_line(t));
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& l : lines) {
        std::cout << l << "\n";
    }
}

AnswerSet run_engine(const P2PSystem& sys, const Query& q, const std::string& engine) {
    if (engine == "fixpoint") {
        return fixpoint::certain_answer(fixpoint::tmin_fixpoint(sys), q);
    }
    if (engine == "global") {
        return compiler::answer_via_global(sys, q);
    }
    if (engine == "distributed") {
        return fixpoint::certain_answer(distsim::run_simulation(sys, distsim::Schedule::sync()).state, q);
    }
    return acyclic::answer_acyclic(sys, q);
}

void print_node_knowledge(const fixpoint::SystemState& state) {
    for (const auto& [id, ns] : state.nodes) {
        if (!ns.status.is_consistent()) {
            std::cout << id << ": inconsistent\n";
            continue;
        }
        const auto& models = ns.status.models();
        std::set<Atom> certain;
        if (!models.empty()) {
            certain = models.front().true_atoms;
            for (const auto& m : models) {
                std::set<Atom> keep;
                std::set_intersection(certain.begin(), certain.end(), m.true_atoms.begin(), m.true_atoms.end(),
                                      std::inserter(keep, keep.end()));
                certain = std::move(keep);
            }
        }
        for (const auto& a : certain) {
            std::cout << id << ": " << to_string(a) << "\n";
        }
    }
}

std::vector<std::size_t> parse_counts(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        const auto n = std::stoul(item, &pos);
        if (pos != item.size() || n == 0 || n > 200) {
            throw CLI::ValidationError("--nodes", "expected comma-separated counts in 1..200, got '" + item + "'");
        }
        out.push_back(n);
    }
    if (out.empty()) {
        throw CLI::ValidationError("--nodes", "no node counts given");
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Query answering over peer-to-peer database networks"};
    app.require_subcommand(1);

    std::string file;
    std::string query_text;
    std::string engine = "fixpoint";
    auto* check = app.add_subcommand("check", "Validate a network file");
    check->add_option("file", file)->required();

    auto* answer = app.add_subcommand("answer", "Certain answers of a query");
    answer->add_option("file", file)->required();
    answer->add_option("-q,--query", query_text, "\"<node>: <query>\"")->required();
    answer->add_option("--engine", engine)->check(CLI::IsMember({"fixpoint", "global", "distributed", "acyclic"}));

    std::string mode = "extended";
    std::size_t extra_domain = 0;
    std::vector<std::string> axioms;
    auto* orc = app.add_subcommand("oracle", "Brute-force answer cross-checked against the fixpoint engine");
    orc->add_option("file", file)->required();
    orc->add_option("-q,--query", query_text)->required();
    orc->add_option("--mode", mode)->check(CLI::IsMember({"local", "extended"}));
    orc->add_option("--extra-domain", extra_domain, "Fresh constants added to the domain");
    orc->add_option("--axiom", axioms, "\"<node>: <formula>\" added to the node theory");

    std::uint64_t seed = 0;
    bool sync = false;
    auto* sim = app.add_subcommand("simulate", "Run the distributed simulator to quiescence");
    sim->add_option("file", file)->required();
    auto* seed_opt = sim->add_option("--seed", seed, "Asynchronous delivery with this seed");
    sim->add_flag("--sync", sync, "Synchronous rounds (default)")->excludes(seed_opt);
    sim->add_option("-q,--query", query_text);

    std::string shape = "chain";
    std::string counts = "10,20,40";
    std::size_t data_size = 20;
    std::size_t repeats = 5;
    auto* bench = app.add_subcommand("bench", "Time acyclic evaluation over generated networks");
    bench->add_option("--shape", shape)->check(CLI::IsMember({"chain", "tree", "random-dag"}));
    bench->add_option("--nodes", counts, "Comma-separated node counts");
    bench->add_option("--data-size", data_size);
    bench->add_option("--repeats", repeats);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        if (*check) {
            const auto sys = load(file);
            const auto violations = validate(sys);
            for (const auto& v : violations) {
                std::cout << v.element << ": " << v.invariant << "\n";
            }
            if (!violations.empty()) {
                return usage;
            }
            const auto graph = dependency_graph(sys);
            std::cout << "ok: " << sys.nodes.size() << " nodes, " << sys.rules.size() << " links, "
                      << (graph.acyclic ? "acyclic" : "cyclic") << "\n";
            return ok;
        }
        if (*answer) {
            const auto sys = load(file);
            print_answers(run_engine(sys, parse_query(query_text), engine));
            return ok;
        }
        if (*orc) {
            const auto sys = load(file);
            const auto q = parse_query(query_text);
            oracle::Config cfg;
            cfg.mode = mode == "local" ? oracle::Mode::local : oracle::Mode::extended;
            cfg.extra_domain = extra_domain;
            cfg.extra_predicates = oracle::signature_of({q});
            for (const auto& text : axioms) {
                auto nf = parse_formula(text);
                cfg.extra_formulas[nf.node].push_back(std::move(nf.formula));
            }
            const auto result = oracle::oracle_certain_answer(oracle::tmdb_fixpoint(sys, cfg), q);
            const auto expected = fixpoint::certain_answer(fixpoint::tmin_fixpoint(sys), q);
            print_answers(result.tuples);
            if (result.all) {
                std::cout << "no model: every tuple is an answer\n";
            }
            const bool agree = result.tuples == expected;
            std::cout << (agree ? "AGREE" : "DISAGREE") << "\n";
            return agree ? ok : disagreement;
        }
        if (*sim) {
            const auto sys = load(file);
            const auto schedule = seed_opt->count() ? distsim::Schedule::seeded(seed) : distsim::Schedule::sync();
            const auto result = distsim::run_simulation(sys, schedule);
            if (query_text.empty()) {
                print_node_knowledge(result.state);
            } else {
                print_answers(fixpoint::certain_answer(result.state, parse_query(query_text)));
            }
            std::cout << distsim::export_stats(result.stats);
            return ok;
        }
        if (*bench) {
            const auto rows = acyclic::complexity_probe(acyclic::parse_shape(shape), parse_counts(counts), data_size,
                                                        repeats);
            std::cout << acyclic::export_probe_csv(rows);
            std::cerr << "note: messages is the synchronous simulator's message count, read as a proxy for node "
                         "complexity\n";
            return ok;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return usage;
    } catch (const FragmentError& e) {
        std::cerr << "rejected: " << e.what() << "\n";
        return fragment;
    } catch (const CapExceeded& e) {
        std::cerr << "rejected: " << e.what() << "\n";
        return fragment;
    } catch (const FileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
    return ok;
}

#include "p2pdb/acyclic.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <random>
#include <sstream>

#include "p2pdb/distsim.hpp"
#include "p2pdb/errors.hpp"

namespace p2pdb::acyclic {

Evaluation evaluate_acyclic(const P2PSystem& system, const NodeId* only_for, const nodekb::Options& kb) {
    const auto graph = dependency_graph(system);
    const auto order = graph.topological_order();
    if (!order) {
        throw FragmentError("the dependency graph has a cycle; acyclic evaluation does not apply");
    }

    std::set<NodeId> wanted;
    if (only_for) {
        if (!system.nodes.contains(*only_for)) {
            throw Error("unknown node " + *only_for);
        }
        std::map<NodeId, std::vector<NodeId>> preds;
        for (const auto& [from, to] : graph.edges) {
            preds[to].push_back(from);
        }
        std::vector<NodeId> work{*only_for};
        wanted.insert(*only_for);
        while (!work.empty()) {
            const NodeId n = work.back();
            work.pop_back();
            for (const auto& p : preds[n]) {
                if (wanted.insert(p).second) {
                    work.push_back(p);
                }
            }
        }
    }

    std::map<NodeId, std::vector<const CoordinationRule*>> incoming;
    for (const auto& r : system.rules) {
        incoming[r.target].push_back(&r);
    }
    for (auto& [_, rules] : incoming) {
        std::sort(rules.begin(), rules.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
    }

    Evaluation ev;
    ev.state.domain = active_domain(system);
    for (const auto& id : *order) {
        if (only_for && !wanted.contains(id)) {
            continue;
        }
        LocalTheory theory = system.nodes.at(id);
        for (const auto* rule : incoming[id]) {
            for (const auto& a : fixpoint::certain_body(ev.state, *rule)) {
                fixpoint::apply_head(theory, *rule, a);
            }
            ev.materialized.push_back(rule->id);
        }
        auto status = nodekb::minimal_models(theory, kb);
        ev.state.nodes.emplace(id, fixpoint::NodeState{std::move(theory), std::move(status)});
        ev.order.push_back(id);
    }
    return ev;
}

AnswerSet answer_acyclic(const P2PSystem& system, const Query& query, const nodekb::Options& kb) {
    const auto ev = evaluate_acyclic(system, &query.node, kb);
    return fixpoint::certain_answer(ev.state, query);
}

Shape parse_shape(const std::string& name) {
    if (name == "chain") {
        return Shape::chain;
    }
    if (name == "tree") {
        return Shape::tree;
    }
    if (name == "random-dag") {
        return Shape::random_dag;
    }
    throw Error("unknown shape '" + name + "' (expected chain, tree or random-dag)");
}

std::string to_string(Shape shape) {
    switch (shape) {
    case Shape::chain:
        return "chain";
    case Shape::tree:
        return "tree";
    case Shape::random_dag:
        return "random-dag";
    }
    return {};
}

P2PSystem make_network(Shape shape, std::size_t node_count, std::size_t data_size, std::uint64_t seed) {
    P2PSystem sys;
    auto name = [](std::size_t k) { return std::to_string(k); };
    for (std::size_t k = 1; k <= node_count; ++k) {
        LocalTheory th;
        th.node = name(k);
        sys.nodes.emplace(th.node, std::move(th));
    }
    if (node_count == 0) {
        return sys;
    }
    for (std::size_t d = 1; d <= data_size; ++d) {
        sys.nodes.at("1").facts.insert(Atom{"1", "P", {Term::constant("C" + std::to_string(d))}});
    }
    auto link = [&](std::size_t from, std::size_t to) {
        CoordinationRule r;
        r.id = "e" + name(from) + "_" + name(to);
        r.body.push_back({name(from), {Atom{name(from), "P", {Term::variable("x")}}}});
        r.target = name(to);
        r.head.push_back(Atom{name(to), "P", {Term::variable("x")}});
        sys.rules.push_back(std::move(r));
    };
    std::mt19937_64 rng(seed);
    for (std::size_t k = 2; k <= node_count; ++k) {
        switch (shape) {
        case Shape::chain:
            link(k - 1, k);
            break;
        case Shape::tree:
            link(k / 2, k);
            break;
        case Shape::random_dag: {
            std::uniform_int_distribution<std::size_t> parent(1, k - 1);
            const std::size_t first = parent(rng);
            link(first, k);
            if (k > 2 && rng() % 2 == 0) {
                std::size_t second = parent(rng);
                if (second != first) {
                    link(second, k);
                }
            }
            break;
        }
        }
    }
    return sys;
}

std::vector<ProbeRow> complexity_probe(Shape shape, const std::vector<std::size_t>& node_counts,
                                       std::size_t data_size, std::size_t repeats) {
    std::vector<ProbeRow> rows;
    for (auto n : node_counts) {
        const auto sys = make_network(shape, n, data_size);
        const Query q{std::to_string(n), {"x"}, {{Atom{std::to_string(n), "P", {Term::variable("x")}}}}};
        std::vector<double> times;
        for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto answers = answer_acyclic(sys, q);
            const auto t1 = std::chrono::steady_clock::now();
            if (answers.empty() && data_size > 0) {
                throw Error("probe network lost its data");
            }
            times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        std::sort(times.begin(), times.end());
        const auto sim = distsim::run_simulation(sys, distsim::Schedule::sync());
        rows.push_back({shape, n, times[times.size() / 2], sim.stats.messages});
    }
    return rows;
}

std::string export_probe_csv(const std::vector<ProbeRow>& rows) {
    std::ostringstream os;
    os << "shape,nodes,millis,messages\n";
    for (const auto& r : rows) {
        os << to_string(r.shape) << "," << r.nodes << "," << std::fixed << std::setprecision(3) << r.millis << ","
           << r.messages << "\n";
    }
    return os.str();
}

} // namespace p2pdb::acyclic

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "p2pdb/fixpoint.hpp"
#include "p2pdb/model.hpp"
#include "p2pdb/nodekb.hpp"

namespace p2pdb::acyclic {

struct Evaluation {
    fixpoint::SystemState state;
    /// Nodes in the order they were finalized (Kahn order, smallest id first).
    std::vector<NodeId> order;
    /// Link ids in the order their head views were materialized.
    std::vector<std::string> materialized;
};

/// Finalizes nodes in topological order: each node first materializes the
/// heads of its incoming links from the certain answers of its (already final)
/// sources, then computes its own models once. With `only_for` set, only that
/// node and its ancestors are evaluated. Throws FragmentError on cycles.
Evaluation evaluate_acyclic(const P2PSystem& system, const NodeId* only_for = nullptr,
                            const nodekb::Options& kb = {});

/// Certain answers of `query` by populating the views of the query node's
/// ancestors and answering over the node theory plus those views.
AnswerSet answer_acyclic(const P2PSystem& system, const Query& query, const nodekb::Options& kb = {});

enum class Shape { chain, tree, random_dag };

Shape parse_shape(const std::string& name);
std::string to_string(Shape shape);

/// Nodes `1..node_count`, each with a unary predicate P copied along every
/// edge (`j:P(x) => i:P(x)`). Node 1 holds `data_size` facts. Chains link
/// k -> k+1, trees link k/2 -> k, random DAGs give each node k > 1 one or two
/// seeded random parents among 1..k-1.
P2PSystem make_network(Shape shape, std::size_t node_count, std::size_t data_size, std::uint64_t seed = 1);

struct ProbeRow {
    Shape shape;
    std::size_t nodes;
    double millis;
    std::size_t messages;
};

/// Times answer_acyclic for `node_count:P(x)` (median of `repeats`) and counts
/// the synchronous simulator's messages, for each node count.
std::vector<ProbeRow> complexity_probe(Shape shape, const std::vector<std::size_t>& node_counts,
                                       std::size_t data_size = 20, std::size_t repeats = 5);

/// `shape,nodes,millis,messages` header plus one line per row.
std::string export_probe_csv(const std::vector<ProbeRow>& rows);

} // namespace p2pdb::acyclic

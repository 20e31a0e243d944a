#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "p2pdb/fixpoint.hpp"
#include "p2pdb/model.hpp"
#include "p2pdb/nodekb.hpp"

// Decentralized evaluation by delta propagation. Every node knows only its own
// theory, the links it sources or targets, and the shared constants; it talks
// to neighbours exclusively through messages. The scheduler delivers messages
// and detects quiescence from outside the protocol.
namespace p2pdb::distsim {

struct Message {
    enum class Kind : unsigned char { tuples, inconsistent };

    NodeId from;
    NodeId to;
    std::string rule_id;
    /// Index of the body conjunct (sourced at `from`) the payload answers.
    std::size_t conjunct = 0;
    Kind kind = Kind::tuples;
    /// New certain tuples over the conjunct's distinguished variables.
    std::vector<Tuple> payload;
    /// Strictly increasing per (from, to).
    std::uint64_t seq = 0;
};

/// One peer. `step` is the only entry point and sees nothing but its inbox.
class PeerNode {
public:
    PeerNode(LocalTheory theory, std::vector<CoordinationRule> links, std::vector<Term> shared_constants,
             nodekb::Options kb = {});

    /// Absorbs the inbox, fires incoming links whose views changed, and emits
    /// the new certain tuples (or a one-off inconsistency notice) on outgoing links.
    std::vector<Message> step(const std::vector<Message>& inbox);

    const NodeId& id() const noexcept { return theory_.node; }
    const LocalTheory& theory() const noexcept { return theory_; }
    const nodekb::NodeStatus& status() const noexcept { return status_; }
    /// Tuples received so far for conjunct `conjunct` of incoming link `rule_id`.
    const std::set<Tuple>& received(const std::string& rule_id, std::size_t conjunct) const;
    /// Tuples sent so far for conjunct `conjunct` of outgoing link `rule_id`.
    const std::set<Tuple>& sent(const std::string& rule_id, std::size_t conjunct) const;

private:
    struct RemoteView {
        std::set<Tuple> tuples;
        bool vacuous = false;
    };
    struct Incoming {
        std::size_t link;
        std::vector<RemoteView> views;
        std::set<Tuple> fired;
    };
    struct Outgoing {
        std::size_t link;
        std::size_t conjunct;
        std::set<Tuple> sent;
        bool notified = false;
    };

    bool absorb(const Message& m);
    bool fire_incoming(Incoming& in);
    void emit(std::vector<Message>& outbox);

    LocalTheory theory_;
    std::vector<CoordinationRule> links_;
    std::vector<Term> constants_;
    nodekb::Options kb_;
    nodekb::NodeStatus status_;
    std::vector<Incoming> incoming_;
    std::vector<Outgoing> outgoing_;
    std::map<NodeId, std::uint64_t> next_seq_;
    std::map<NodeId, std::uint64_t> last_seen_seq_;
    bool started_ = false;
};

struct Schedule {
    enum class Mode { synchronous, async };

    Mode mode = Mode::synchronous;
    std::uint64_t seed = 0;

    static Schedule sync() { return {}; }
    static Schedule seeded(std::uint64_t s) { return {Mode::async, s}; }
};

struct Stats {
    std::size_t messages = 0;
    std::size_t rounds = 0;
    std::map<std::pair<NodeId, NodeId>, std::size_t> per_edge;
};

struct Result {
    fixpoint::SystemState state;
    Stats stats;
};

struct Options {
    nodekb::Options kb;
    std::size_t message_cap = 1'000'000;
    /// Called after every delivery step with the node that just stepped.
    std::function<void(const PeerNode&, const std::vector<Message>& inbox, const std::vector<Message>& outbox)> observer;
};

/// Runs all peers under `schedule` until no message is in flight. Async mode
/// delivers one message at a time from a seeded random non-empty edge queue;
/// each edge queue is FIFO.
Result run_simulation(const P2PSystem& system, const Schedule& schedule, const Options& options = {});

/// `messages=<n> rounds=<n>` then `edge=<j>-><i> messages=<n>` lines sorted by edge.
std::string export_stats(const Stats& stats);

} // namespace p2pdb::distsim

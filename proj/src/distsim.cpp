#include "p2pdb/distsim.hpp"

#include <deque>
#include <random>
#include <sstream>

#include "p2pdb/errors.hpp"

namespace p2pdb::distsim {

PeerNode::PeerNode(LocalTheory theory, std::vector<CoordinationRule> links, std::vector<Term> shared_constants,
                   nodekb::Options kb)
    : theory_(std::move(theory)), links_(std::move(links)), constants_(std::move(shared_constants)), kb_(kb),
      status_(nodekb::NodeStatus::inconsistent()) {
    for (std::size_t i = 0; i < links_.size(); ++i) {
        const auto& rule = links_[i];
        if (rule.target == id()) {
            incoming_.push_back({i, std::vector<RemoteView>(rule.body.size()), {}});
        }
        for (std::size_t l = 0; l < rule.body.size(); ++l) {
            if (rule.body[l].source == id()) {
                outgoing_.push_back({i, l, {}, false});
            }
        }
    }
}

const std::set<Tuple>& PeerNode::received(const std::string& rule_id, std::size_t conjunct) const {
    for (const auto& in : incoming_) {
        if (links_[in.link].id == rule_id) {
            return in.views.at(conjunct).tuples;
        }
    }
    throw Error("node " + id() + " has no incoming link " + rule_id);
}

const std::set<Tuple>& PeerNode::sent(const std::string& rule_id, std::size_t conjunct) const {
    for (const auto& out : outgoing_) {
        if (links_[out.link].id == rule_id && out.conjunct == conjunct) {
            return out.sent;
        }
    }
    throw Error("node " + id() + " sources no conjunct " + std::to_string(conjunct) + " of link " + rule_id);
}

bool PeerNode::absorb(const Message& m) {
    if (m.to != id()) {
        throw SimulationError("message for node " + m.to + " delivered to node " + id());
    }
    auto [it, fresh] = last_seen_seq_.emplace(m.from, m.seq);
    if (!fresh) {
        if (m.seq <= it->second) {
            throw SimulationError("out-of-order message on edge " + m.from + "->" + id());
        }
        it->second = m.seq;
    }
    for (auto& in : incoming_) {
        const auto& rule = links_[in.link];
        if (rule.id != m.rule_id) {
            continue;
        }
        if (m.conjunct >= rule.body.size() || rule.body[m.conjunct].source != m.from) {
            throw SimulationError("message names conjunct " + std::to_string(m.conjunct) + " of link " + m.rule_id +
                                  " not sourced at " + m.from);
        }
        auto& view = in.views[m.conjunct];
        if (m.kind == Message::Kind::inconsistent) {
            const bool was = view.vacuous;
            view.vacuous = true;
            return !was;
        }
        bool grew = false;
        for (const auto& t : m.payload) {
            grew |= view.tuples.insert(t).second;
        }
        return grew;
    }
    throw SimulationError("node " + id() + " is not the target of link " + m.rule_id);
}

bool PeerNode::fire_incoming(Incoming& in) {
    const auto& rule = links_[in.link];
    std::vector<std::set<Tuple>> relations;
    for (std::size_t l = 0; l < rule.body.size(); ++l) {
        const auto& view = in.views[l];
        relations.push_back(view.vacuous ? nodekb::all_tuples(constants_, rule.conjunct_vars(l).size())
                                         : view.tuples);
    }
    bool changed = false;
    for (const auto& a : fixpoint::join_body(rule, relations)) {
        if (in.fired.insert(a).second) {
            changed |= fixpoint::apply_head(theory_, rule, a);
        }
    }
    return changed;
}

void PeerNode::emit(std::vector<Message>& outbox) {
    for (auto& out : outgoing_) {
        const auto& rule = links_[out.link];
        Message m;
        m.from = id();
        m.to = rule.target;
        m.rule_id = rule.id;
        m.conjunct = out.conjunct;
        if (!status_.is_consistent()) {
            if (out.notified) {
                continue;
            }
            out.notified = true;
            m.kind = Message::Kind::inconsistent;
        } else {
            for (auto& t : fixpoint::certain_conjunct(status_, rule, out.conjunct, constants_)) {
                if (out.sent.insert(t).second) {
                    m.payload.push_back(t);
                }
            }
            if (m.payload.empty()) {
                continue;
            }
        }
        m.seq = ++next_seq_[m.to];
        outbox.push_back(std::move(m));
    }
}

std::vector<Message> PeerNode::step(const std::vector<Message>& inbox) {
    bool views_changed = !started_;
    for (const auto& m : inbox) {
        views_changed |= absorb(m);
    }
    bool theory_changed = !started_;
    if (views_changed) {
        for (auto& in : incoming_) {
            theory_changed |= fire_incoming(in);
        }
    }
    std::vector<Message> outbox;
    if (theory_changed) {
        auto next = nodekb::minimal_models(theory_, kb_);
        const bool status_changed = !started_ || next != status_;
        status_ = std::move(next);
        if (status_changed) {
            emit(outbox);
        }
    }
    started_ = true;
    return outbox;
}

namespace {

std::map<NodeId, PeerNode> make_peers(const P2PSystem& system, const Options& options) {
    const auto constants = active_domain(system);
    std::map<NodeId, PeerNode> peers;
    for (const auto& [id, theory] : system.nodes) {
        std::vector<CoordinationRule> links;
        for (const auto& r : system.rules) {
            bool touches = r.target == id;
            for (const auto& c : r.body) {
                touches = touches || c.source == id;
            }
            if (touches) {
                links.push_back(r);
            }
        }
        peers.emplace(id, PeerNode(theory, std::move(links), constants, options.kb));
    }
    return peers;
}

void count(Stats& stats, const std::vector<Message>& out, const Options& options) {
    for (const auto& m : out) {
        ++stats.messages;
        ++stats.per_edge[{m.from, m.to}];
    }
    if (stats.messages > options.message_cap) {
        throw SimulationError("message cap of " + std::to_string(options.message_cap) +
                              " exceeded before quiescence");
    }
}

} // namespace

Result run_simulation(const P2PSystem& system, const Schedule& schedule, const Options& options) {
    fixpoint::check_termination_fragment(system);
    auto peers = make_peers(system, options);
    Stats stats;

    auto deliver = [&](PeerNode& peer, const std::vector<Message>& inbox) {
        auto out = peer.step(inbox);
        if (options.observer) {
            options.observer(peer, inbox, out);
        }
        count(stats, out, options);
        return out;
    };

    if (schedule.mode == Schedule::Mode::synchronous) {
        std::vector<Message> in_flight;
        for (auto& [_, peer] : peers) {
            for (auto& m : deliver(peer, {})) {
                in_flight.push_back(std::move(m));
            }
        }
        stats.rounds = 1;
        while (!in_flight.empty()) {
            std::map<NodeId, std::vector<Message>> inboxes;
            for (auto& m : in_flight) {
                inboxes[m.to].push_back(std::move(m));
            }
            in_flight.clear();
            for (auto& [to, inbox] : inboxes) {
                for (auto& m : deliver(peers.at(to), inbox)) {
                    in_flight.push_back(std::move(m));
                }
            }
            ++stats.rounds;
        }
    } else {
        std::map<std::pair<NodeId, NodeId>, std::deque<Message>> queues;
        auto enqueue = [&](std::vector<Message> out) {
            for (auto& m : out) {
                queues[{m.from, m.to}].push_back(std::move(m));
            }
        };
        for (auto& [_, peer] : peers) {
            enqueue(deliver(peer, {}));
        }
        stats.rounds = 1;
        std::mt19937_64 rng(schedule.seed);
        while (true) {
            std::vector<std::pair<NodeId, NodeId>> ready;
            for (const auto& [edge, q] : queues) {
                if (!q.empty()) {
                    ready.push_back(edge);
                }
            }
            if (ready.empty()) {
                break;
            }
            std::uniform_int_distribution<std::size_t> pick(0, ready.size() - 1);
            auto& q = queues[ready[pick(rng)]];
            Message m = std::move(q.front());
            q.pop_front();
            enqueue(deliver(peers.at(m.to), {m}));
            ++stats.rounds;
        }
    }

    Result result;
    result.stats = std::move(stats);
    result.state.domain = active_domain(system);
    result.state.iterations = result.stats.rounds;
    for (auto& [id, peer] : peers) {
        result.state.nodes.emplace(id, fixpoint::NodeState{peer.theory(), peer.status()});
    }
    return result;
}

std::string export_stats(const Stats& stats) {
    std::ostringstream os;
    os << "messages=" << stats.messages << " rounds=" << stats.rounds << "\n";
    for (const auto& [edge, n] : stats.per_edge) {
        os << "edge=" << edge.first << "->" << edge.second << " messages=" << n << "\n";
    }
    return os.str();
}

} // namespace p2pdb::distsim

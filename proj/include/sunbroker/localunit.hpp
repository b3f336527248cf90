#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "sunbroker/errors.hpp"
#include "sunbroker/protocol.hpp"
#include "sunbroker/time.hpp"

namespace sunbroker {

enum class NodeState { off, booting, idle, computing };

inline const char* to_string(NodeState s) {
    switch (s) {
        case NodeState::off: return "off";
        case NodeState::booting: return "booting";
        case NodeState::idle: return "idle";
        case NodeState::computing: return "computing";
    }
    return "?";
}

struct NodePowerModel {
    double p_idle_w = 10.0;
    double p_load_w = 50.0;
    double boot_s = 120.0;

    void validate() const {
        if (p_idle_w < 0.0) throw DomainError("p_idle_w must be >= 0");
        if (p_load_w < p_idle_w) throw DomainError("p_load_w must be >= p_idle_w");
        if (boot_s < 0.0) throw DomainError("boot_s must be >= 0");
    }
};

// Per-slot energy balance. produced + bought = compute + sold + curtailed.
struct SlotAccount {
    UtcTime slot_start{};
    double produced_kwh = 0.0;
    double compute_kwh = 0.0;
    double sold_kwh = 0.0;
    double bought_kwh = 0.0;
    double curtailed_kwh = 0.0;
};

// Simulated on-premises unit: a rack of identical nodes fed by the inverter.
// Commands arrive at slot boundaries; tick_slot integrates one hour of node
// consumption against the realized production.
class LocalUnit {
public:
    LocalUnit(std::string lu_id, std::size_t node_count, NodePowerModel power)
        : lu_id_(std::move(lu_id)), power_(power) {
        power_.validate();
        nodes_.resize(node_count);
        for (std::size_t i = 0; i < node_count; ++i) {
            nodes_[i].id = "n" + std::to_string(i);
            index_[nodes_[i].id] = i;
        }
    }

    const std::string& id() const { return lu_id_; }
    std::size_t node_count() const { return nodes_.size(); }

    std::size_t count_in(NodeState s) const {
        std::size_t n = 0;
        for (const auto& node : nodes_)
            if (node.state == s) ++n;
        return n;
    }

    // Nodes that are or will become available this slot (anything not off).
    std::size_t awake_count() const { return nodes_.size() - count_in(NodeState::off); }

    std::vector<NodeStateEntry> node_states() const {
        std::vector<NodeStateEntry> out;
        out.reserve(nodes_.size());
        for (const auto& node : nodes_) out.push_back({node.id, to_string(node.state)});
        return out;
    }

    // Moves n off nodes into booting. boot_s of zero brings them up at once.
    void wake(std::size_t n) {
        if (n > count_in(NodeState::off))
            throw CapacityError("wake(" + std::to_string(n) + "): only " +
                                std::to_string(count_in(NodeState::off)) + " nodes are off");
        for (auto& node : nodes_) {
            if (n == 0) break;
            if (node.state == NodeState::off) {
                node.state = power_.boot_s > 0.0 ? NodeState::booting : NodeState::idle;
                node.boot_remaining_s = power_.boot_s;
                --n;
            }
        }
    }

    // Shuts down awake nodes at the slot boundary. Only idle or computing
    // nodes may be slept; anything else is rejected with state unchanged.
    void sleep(const std::vector<std::string>& node_ids) {
        std::vector<Node*> targets;
        for (const auto& id : node_ids) {
            auto it = index_.find(id);
            if (it == index_.end()) throw NotFoundError("unknown node '" + id + "'");
            Node* found = &nodes_[it->second];
            if (found->state != NodeState::idle && found->state != NodeState::computing)
                throw DomainError("node '" + id + "' is " + to_string(found->state) +
                                  ", cannot sleep");
            targets.push_back(found);
        }
        for (Node* node : targets) {
            node->state = NodeState::off;
            node->boot_remaining_s = 0.0;
        }
    }

    // Convenience: sleep the n highest-numbered awake nodes.
    std::vector<std::string> sleep_excess(std::size_t n) {
        std::vector<std::string> ids;
        for (auto it = nodes_.rbegin(); it != nodes_.rend() && ids.size() < n; ++it)
            if (it->state == NodeState::idle || it->state == NodeState::computing)
                ids.push_back(it->id);
        if (ids.size() < n) throw CapacityError("fewer than " + std::to_string(n) + " nodes awake");
        sleep(ids);
        return ids;
    }

    // One hour of operation. leased_count nodes compute (after finishing any
    // boot), the remaining awake nodes idle. Boot time is billed at idle
    // power and prorated against the hour.
    std::pair<SlotAccount, TelemetryReport> tick_slot(UtcTime slot_start,
                                                      double actual_production_kwh,
                                                      std::size_t leased_count) {
        if (actual_production_kwh < 0.0) throw DomainError("production must be >= 0");

        std::size_t available = 0;
        for (const auto& node : nodes_)
            if (node.state != NodeState::off && node.boot_remaining_s <= 3600.0) ++available;
        if (leased_count > available)
            throw CapacityError("leased_count " + std::to_string(leased_count) + " exceeds " +
                                std::to_string(available) + " available nodes");

        double compute_wh = 0.0;
        std::size_t to_lease = leased_count;
        for (auto& node : nodes_) {
            if (node.state == NodeState::off) continue;

            const double boot_h = std::min(node.boot_remaining_s, 3600.0) / 3600.0;
            const double run_h = 1.0 - boot_h;
            const bool finishes_boot = node.boot_remaining_s <= 3600.0;

            bool computes = false;
            if (finishes_boot && to_lease > 0) {
                computes = true;
                --to_lease;
            }

            compute_wh += power_.p_idle_w * boot_h +
                          (computes ? power_.p_load_w : power_.p_idle_w) * run_h;

            if (!finishes_boot) {
                node.boot_remaining_s -= 3600.0;
            } else {
                node.boot_remaining_s = 0.0;
                node.state = computes ? NodeState::computing : NodeState::idle;
            }
        }

        SlotAccount acc;
        acc.slot_start = slot_start;
        acc.produced_kwh = actual_production_kwh;
        acc.compute_kwh = compute_wh / 1000.0;
        if (actual_production_kwh >= acc.compute_kwh) {
            acc.sold_kwh = actual_production_kwh - acc.compute_kwh;
        } else {
            acc.bought_kwh = acc.compute_kwh - actual_production_kwh;
        }

        TelemetryReport telemetry{lu_id_, slot_start, acc.produced_kwh, acc.compute_kwh,
                                  node_states()};
        return {acc, telemetry};
    }

private:
    struct Node {
        std::string id;
        NodeState state = NodeState::off;
        double boot_remaining_s = 0.0;
    };

    std::string lu_id_;
    NodePowerModel power_;
    std::vector<Node> nodes_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace sunbroker

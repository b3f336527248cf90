#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sunbroker/economics.hpp"
#include "sunbroker/errors.hpp"
#include "sunbroker/protocol.hpp"
#include "sunbroker/solar.hpp"

namespace sunbroker {

struct DecisionPolicy {
    double expected_alpha = 1.0; // allocation fraction assumed at decision time
    double slot_hours = 1.0;

    void validate() const {
        if (!(expected_alpha >= 0.0 && expected_alpha <= 1.0))
            throw DomainError("expected_alpha must be in [0, 1]");
        if (slot_hours != 1.0) throw DomainError("slot_hours is fixed at 1");
    }
};

struct Decision {
    enum class Kind { sell, compute };
    Kind kind = Kind::sell;
    std::string instance;
    std::int64_t count = 0;

    static Decision sell() { return {}; }
    static Decision compute(std::string instance_name, std::int64_t n) {
        if (n < 1) throw DomainError("compute decision needs count >= 1");
        return {Kind::compute, std::move(instance_name), n};
    }
    bool is_compute() const { return kind == Kind::compute; }
};

// Broker-side view of one local unit.
struct LuRecord {
    std::string lu_id;
    PlantConfig plant;
    std::int64_t cluster_size = 0;
    double baseline_kw = 0.0; // local consumption subtracted before offering
    std::optional<TelemetryReport> last_telemetry;
};

// Sell-or-compute for one slot. Sizing takes the floor of what the forecast
// can power, capped by the cluster; the profitability boundary reuses
// breakeven_alpha so the two modules can never disagree. Ties sell.
inline Decision decide_slot(double forecast_kw, const InstanceType& inst,
                            std::int64_t cluster_size, const Tariff& tariff,
                            const DecisionPolicy& policy) {
    if (forecast_kw < 0.0) throw DomainError("forecast must be >= 0");
    policy.validate();

    const auto powerable = std::int64_t(std::floor(forecast_kw * inst.eta_c));
    const std::int64_t n = std::min(powerable, cluster_size);
    if (n < 1) return Decision::sell();
    if (inst.eta_c * inst.v_i <= 0.0) return Decision::sell(); // no revenue possible
    if (!(policy.expected_alpha > breakeven_alpha(inst.eta_c, inst.v_i, tariff.feed_in)))
        return Decision::sell();
    return Decision::compute(inst.name, n);
}

using Forecaster = std::function<double(const LuRecord&, UtcTime slot_start)>;

struct SlotCycleResult {
    std::vector<std::pair<std::string, Decision>> decisions;
    std::vector<std::string> skipped; // stale-telemetry units, flagged
};

// One broker cycle over the registry: forecast each unit's surplus for the
// slot, decide, and drive the fleet over the bus (wake/sleep to reach the
// target count, pool offer when computing). Units whose telemetry is more
// than two slots old are skipped and flagged.
inline SlotCycleResult slot_cycle(std::vector<LuRecord>& registry, const Forecaster& forecaster,
                                  const InstanceType& inst, const Tariff& tariff,
                                  const DecisionPolicy& policy, UtcTime slot_start, Bus& bus,
                                  Sequencer& seq) {
    policy.validate();
    SlotCycleResult result;

    for (auto& lu : registry) {
        const auto stale_after = std::chrono::hours{2};
        if (!lu.last_telemetry ||
            slot_start - lu.last_telemetry->slot_start > stale_after) {
            result.skipped.push_back(lu.lu_id);
            continue;
        }

        const double forecast = forecaster(lu, slot_start);
        const double surplus = std::max(0.0, forecast - lu.baseline_kw);
        const Decision decision = decide_slot(surplus, inst, lu.cluster_size, tariff, policy);

        std::int64_t awake = 0;
        for (const auto& ns : lu.last_telemetry->node_states)
            if (ns.state != "off") ++awake;

        if (decision.is_compute()) {
            if (decision.count > awake) {
                bus.publish("lu/" + lu.lu_id + "/cmd",
                            Message{seq.next(), slot_start,
                                    WakeCommand{lu.lu_id, decision.count - awake}});
            } else if (decision.count < awake) {
                std::vector<std::string> excess;
                for (auto it = lu.last_telemetry->node_states.rbegin();
                     it != lu.last_telemetry->node_states.rend() &&
                     std::int64_t(excess.size()) < awake - decision.count;
                     ++it)
                    if (it->state != "off") excess.push_back(it->node_id);
                bus.publish("lu/" + lu.lu_id + "/cmd",
                            Message{seq.next(), slot_start, SleepCommand{lu.lu_id, excess}});
            }
            bus.publish("eb/offers",
                        Message{seq.next(), slot_start,
                                PoolOffer{lu.lu_id, inst.name, decision.count, slot_start}});
        } else if (awake > 0) {
            std::vector<std::string> all_awake;
            for (const auto& ns : lu.last_telemetry->node_states)
                if (ns.state != "off") all_awake.push_back(ns.node_id);
            bus.publish("lu/" + lu.lu_id + "/cmd",
                        Message{seq.next(), slot_start, SleepCommand{lu.lu_id, all_awake}});
        }

        result.decisions.emplace_back(lu.lu_id, decision);
    }
    return result;
}

struct AlphaReport {
    double offered_instance_hours = 0.0;
    double used_instance_hours = 0.0;
    std::optional<double> alpha; // absent when nothing was offered
};

// Matches pool-monitor usage against what was offered, per unit. Usage that
// references a slot with no offer, or exceeds the offered capacity, is an
// integrity failure naming the slot.
inline std::map<std::string, AlphaReport> reconcile_alpha(std::span<const PoolOffer> offers,
                                                          std::span<const UsageReport> usage,
                                                          double slot_hours = 1.0) {
    std::map<std::pair<std::string, UtcTime>, double> offered_by_slot;
    std::map<std::string, AlphaReport> out;

    for (const auto& o : offers) {
        offered_by_slot[{o.lu_id, o.slot_start}] += double(o.count) * slot_hours;
        out[o.lu_id].offered_instance_hours += double(o.count) * slot_hours;
    }

    std::map<std::pair<std::string, UtcTime>, double> used_by_slot;
    for (const auto& u : usage) {
        const auto key = std::make_pair(u.lu_id, u.slot_start);
        auto it = offered_by_slot.find(key);
        if (it == offered_by_slot.end())
            throw IntegrityError("usage for " + u.lu_id + " at " + format_iso8601(u.slot_start) +
                                 " has no matching offer");
        used_by_slot[key] += u.instance_hours_used;
        if (used_by_slot[key] > it->second + 1e-9)
            throw IntegrityError("usage " + std::to_string(used_by_slot[key]) + " exceeds offer " +
                                 std::to_string(it->second) + " for " + u.lu_id + " at " +
                                 format_iso8601(u.slot_start));
        out[u.lu_id].used_instance_hours += u.instance_hours_used;
    }

    for (auto& [lu_id, report] : out)
        if (report.offered_instance_hours > 0.0)
            report.alpha = report.used_instance_hours / report.offered_instance_hours;
    return out;
}

} // namespace sunbroker

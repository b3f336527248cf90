#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sunbroker/errors.hpp"
#include "sunbroker/time.hpp"

namespace sunbroker {

// ---- message vocabulary ----------------------------------------------------
//
// Wire format: UTF-8, one JSON object per newline-terminated line. Every
// message carries `type`, `seq` (monotone per sender) and `ts`, then the
// variant fields in the documented order (see docs/formats.md).

struct NodeStateEntry {
    std::string node_id;
    std::string state; // off | booting | idle | computing
};

struct TelemetryReport {
    std::string lu_id;
    UtcTime slot_start;
    double production_kwh;
    double local_consumption_kwh;
    std::vector<NodeStateEntry> node_states;
};

struct StatusReport {
    std::string lu_id;
    std::vector<NodeStateEntry> node_states;
};

struct WakeCommand {
    std::string lu_id;
    std::int64_t node_count;
};

struct SleepCommand {
    std::string lu_id;
    std::vector<std::string> node_ids;
};

struct PoolOffer {
    std::string lu_id;
    std::string instance_type;
    std::int64_t count;
    UtcTime slot_start;
};

struct LeaseGrant {
    std::string lu_id;
    std::string instance_type;
    std::int64_t count_granted;
    double duration_h;
    double price; // EUR per instance-hour
};

struct UsageReport {
    std::string lu_id;
    UtcTime slot_start;
    double instance_hours_used;
};

using MessageBody = std::variant<TelemetryReport, StatusReport, WakeCommand, SleepCommand,
                                 PoolOffer, LeaseGrant, UsageReport>;

struct Message {
    std::uint64_t seq = 0;
    UtcTime ts{};
    MessageBody body;
};

namespace detail {

inline nlohmann::ordered_json node_states_json(const std::vector<NodeStateEntry>& states) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& s : states) arr.push_back({s.node_id, s.state});
    return arr;
}

inline std::vector<NodeStateEntry> node_states_from(const nlohmann::json& arr) {
    std::vector<NodeStateEntry> out;
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2)
            throw FormatError("node_states entries must be [node_id, state] pairs");
        out.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
    }
    return out;
}

inline void require_nonneg(double v, const char* field) {
    if (v < 0.0) throw DomainError(std::string(field) + " must be >= 0");
}

inline void require_nonneg(std::int64_t v, const char* field) {
    if (v < 0) throw DomainError(std::string(field) + " must be >= 0");
}

} // namespace detail

// One JSON object, no embedded newlines.
inline std::string encode(const Message& msg) {
    nlohmann::ordered_json j;
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, TelemetryReport>) {
                detail::require_nonneg(body.production_kwh, "production_kwh");
                detail::require_nonneg(body.local_consumption_kwh, "local_consumption_kwh");
                j["type"] = "telemetry";
                j["seq"] = msg.seq;
                j["ts"] = format_iso8601(msg.ts);
                j["lu_id"] = body.lu_id;
                j["slot_start"] = format_iso8601(body.slot_start);
                j["production_kwh"] = body.production_kwh;
                j["local_consumption_kwh"] = body.local_consumption_kwh;
                j["node_states"] = detail::node_states_json(body.node_states);
            } else if constexpr (std::is_same_v<T, StatusReport>) {
                j["type"] = "status";
                j["seq"] = msg.seq;
                j["ts"] = format_iso8601(msg.ts);
                j["lu_id"] = body.lu_id;
                j["node_states"] = detail::node_states_json(body.node_states);
            } else if constexpr (std::is_same_v<T, WakeCommand>) {
                detail::require_nonneg(body.node_count, "node_count");
                j["type"] = "wake";
                j["seq"] = msg.seq;
                j["ts"] = format_iso8601(msg.ts);
                j["lu_id"] = body.lu_id;
                j["node_count"] = body.node_count;
            } else if constexpr (std::is_same_v<T, SleepCommand>) {
                j["type"] = "sleep";
                j["seq"] = msg.seq;
                j["ts"] = format_iso8601(msg.ts);
                j["lu_id"] = body.lu_id;
                j["node_ids"] = body.node_ids;
            } else if constexpr (std::is_same_v<T, PoolOffer>) {
                detail::require_nonneg(body.count, "count");
                j["type"] = "offer";
                j["seq"] = msg.seq;
                j["ts"] = format_iso8601(msg.ts);
                j["lu_id"] = body.lu_id;
                j["instance_type"] = body.instance_type;
                j["count"] = body.count;
                j["slot_start"] = format_iso8601(body.slot_start);
            } else if constexpr (std::is_same_v<T, LeaseGrant>) {
                detail::require_nonneg(body.count_granted, "count_granted");
                detail::require_nonneg(body.duration_h, "duration_h");
                detail::require_nonneg(body.price, "price");
                j["type"] = "grant";
                j["seq"] = msg.seq;
                j["ts"] = format_iso8601(msg.ts);
                j["lu_id"] = body.lu_id;
                j["instance_type"] = body.instance_type;
                j["count_granted"] = body.count_granted;
                j["duration_h"] = body.duration_h;
                j["price"] = body.price;
            } else if constexpr (std::is_same_v<T, UsageReport>) {
                detail::require_nonneg(body.instance_hours_used, "instance_hours_used");
                j["type"] = "usage";
                j["seq"] = msg.seq;
                j["ts"] = format_iso8601(msg.ts);
                j["lu_id"] = body.lu_id;
                j["slot_start"] = format_iso8601(body.slot_start);
                j["instance_hours_used"] = body.instance_hours_used;
            }
        },
        msg.body);
    return j.dump();
}

inline Message decode(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid message JSON: ") + e.what());
    }

    auto field = [&](const char* name) -> const nlohmann::json& {
        auto it = j.find(name);
        if (it == j.end()) throw FormatError(std::string("missing field '") + name + "'");
        return *it;
    };

    Message msg;
    try {
        const std::string type = field("type").get<std::string>();
        msg.seq = field("seq").get<std::uint64_t>();
        msg.ts = parse_iso8601(field("ts").get<std::string>());

        if (type == "telemetry") {
            TelemetryReport body;
            body.lu_id = field("lu_id").get<std::string>();
            body.slot_start = parse_iso8601(field("slot_start").get<std::string>());
            body.production_kwh = field("production_kwh").get<double>();
            body.local_consumption_kwh = field("local_consumption_kwh").get<double>();
            body.node_states = detail::node_states_from(field("node_states"));
            detail::require_nonneg(body.production_kwh, "production_kwh");
            detail::require_nonneg(body.local_consumption_kwh, "local_consumption_kwh");
            msg.body = std::move(body);
        } else if (type == "status") {
            StatusReport body;
            body.lu_id = field("lu_id").get<std::string>();
            body.node_states = detail::node_states_from(field("node_states"));
            msg.body = std::move(body);
        } else if (type == "wake") {
            WakeCommand body{field("lu_id").get<std::string>(),
                             field("node_count").get<std::int64_t>()};
            detail::require_nonneg(body.node_count, "node_count");
            msg.body = std::move(body);
        } else if (type == "sleep") {
            SleepCommand body;
            body.lu_id = field("lu_id").get<std::string>();
            body.node_ids = field("node_ids").get<std::vector<std::string>>();
            msg.body = std::move(body);
        } else if (type == "offer") {
            PoolOffer body{field("lu_id").get<std::string>(),
                           field("instance_type").get<std::string>(),
                           field("count").get<std::int64_t>(),
                           parse_iso8601(field("slot_start").get<std::string>())};
            detail::require_nonneg(body.count, "count");
            msg.body = std::move(body);
        } else if (type == "grant") {
            LeaseGrant body{field("lu_id").get<std::string>(),
                            field("instance_type").get<std::string>(),
                            field("count_granted").get<std::int64_t>(),
                            field("duration_h").get<double>(), field("price").get<double>()};
            detail::require_nonneg(body.count_granted, "count_granted");
            msg.body = std::move(body);
        } else if (type == "usage") {
            UsageReport body{field("lu_id").get<std::string>(),
                             parse_iso8601(field("slot_start").get<std::string>()),
                             field("instance_hours_used").get<double>()};
            detail::require_nonneg(body.instance_hours_used, "instance_hours_used");
            msg.body = std::move(body);
        } else {
            throw FormatError("unknown message type '" + type + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed message field: ") + e.what());
    }
    return msg;
}

// ---- topics and the in-process bus ------------------------------------------

inline std::vector<std::string> topic_segments(const std::string& path) {
    std::vector<std::string> segs;
    std::string cur;
    for (char ch : path) {
        if (ch == '/') {
            segs.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    segs.push_back(cur);
    for (const auto& s : segs)
        if (s.empty()) throw DomainError("topic '" + path + "' has an empty segment");
    return segs;
}

// `+` matches exactly one segment; segment counts must agree.
inline bool topic_matches(const std::string& pattern, const std::string& topic) {
    const auto p = topic_segments(pattern);
    const auto t = topic_segments(topic);
    if (p.size() != t.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] != "+" && p[i] != t[i]) return false;
    return true;
}

// Synchronous in-process pub/sub: delivery in publish order, at most once,
// only to subscribers registered before the publish. No retained messages.
class Bus {
public:
    using Handler = std::function<void(const std::string& topic, const Message&)>;

    void subscribe(const std::string& pattern, Handler handler) {
        if (closed_) throw LifecycleError("subscribe on closed bus");
        topic_segments(pattern); // validates
        subs_.push_back({pattern, std::move(handler)});
    }

    // Returns the number of deliveries; zero subscribers is not an error.
    std::size_t publish(const std::string& topic, const Message& msg) {
        if (closed_) throw LifecycleError("publish on closed bus");
        topic_segments(topic);
        std::size_t delivered = 0;
        for (const auto& sub : subs_) {
            if (topic_matches(sub.pattern, topic)) {
                sub.handler(topic, msg);
                ++delivered;
            }
        }
        return delivered;
    }

    void close() { closed_ = true; }
    bool closed() const { return closed_; }

private:
    struct Subscription {
        std::string pattern;
        Handler handler;
    };
    std::vector<Subscription> subs_;
    bool closed_ = false;
};

// Per-sender monotone sequence numbers.
class Sequencer {
public:
    std::uint64_t next() { return ++last_; }

private:
    std::uint64_t last_ = 0;
};

} // namespace sunbroker

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sunbroker/protocol.hpp"

using namespace sunbroker;

namespace {
UtcTime t0() { return make_utc(2021, 6, 1, 12, 0); }
} // namespace

TEST_CASE("wake command encodes to the documented line") {
    Message msg{5, t0(), WakeCommand{"lu-1", 3}};
    CHECK(encode(msg) ==
          R"({"type":"wake","seq":5,"ts":"2021-06-01T12:00:00Z","lu_id":"lu-1","node_count":3})");
}

TEST_CASE("encoded messages never contain newlines") {
    Message msg{1, t0(),
                TelemetryReport{"lu-9", t0(), 1.25, 0.5, {{"n0", "idle"}, {"n1", "computing"}}}};
    const std::string line = encode(msg);
    CHECK(line.find('\n') == std::string::npos);
}

TEST_CASE("encode/decode round-trips every variant") {
    std::vector<Message> all = {
        {1, t0(), TelemetryReport{"lu-1", t0(), 2.5, 0.75, {{"n0", "off"}, {"n1", "booting"}}}},
        {2, t0(), StatusReport{"lu-1", {{"n0", "idle"}}}},
        {3, t0(), WakeCommand{"lu-2", 7}},
        {4, t0(), SleepCommand{"lu-2", {"n3", "n4"}}},
        {5, t0(), PoolOffer{"lu-1", "t2.micro", 12, t0()}},
        {6, t0(), LeaseGrant{"lu-1", "t2.micro", 10, 1.0, 0.0118}},
        {7, t0(), UsageReport{"lu-1", t0(), 10.0}},
    };
    for (const auto& msg : all) {
        const std::string line = encode(msg);
        const Message back = decode(line);
        CHECK(back.seq == msg.seq);
        CHECK(back.ts == msg.ts);
        CHECK(back.body.index() == msg.body.index());
        CHECK(encode(back) == line); // byte-stable second pass
    }
}

TEST_CASE("round-trip preserves randomized payloads") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> e(0.0, 500.0);
    std::uniform_int_distribution<int> c(0, 5000);
    for (int i = 0; i < 200; ++i) {
        Message msg{std::uint64_t(i + 1), t0() + std::chrono::hours{i},
                    TelemetryReport{"lu-" + std::to_string(i % 7),
                                    t0() + std::chrono::hours{i - 1},
                                    e(rng),
                                    e(rng),
                                    {{"n0", "computing"}, {"n1", "idle"}}}};
        const Message back = decode(encode(msg));
        const auto& a = std::get<TelemetryReport>(msg.body);
        const auto& b = std::get<TelemetryReport>(back.body);
        CHECK(a.production_kwh == b.production_kwh);
        CHECK(a.local_consumption_kwh == b.local_consumption_kwh);
        CHECK(a.slot_start == b.slot_start);
        CHECK(b.node_states.size() == 2);

        Message offer{std::uint64_t(i), t0(), PoolOffer{"lu-x", "edge", c(rng), t0()}};
        CHECK(std::get<PoolOffer>(decode(encode(offer)).body).count ==
              std::get<PoolOffer>(offer.body).count);
    }
}

TEST_CASE("decode rejects unknown types and malformed lines") {
    CHECK_THROWS_AS(decode(R"({"type":"unknown","seq":1,"ts":"2021-06-01T12:00:00Z"})"),
                    FormatError);
    CHECK_THROWS_AS(decode("not json at all"), FormatError);
    CHECK_THROWS_AS(decode(R"({"type":"wake","seq":1,"ts":"2021-06-01T12:00:00Z"})"),
                    FormatError); // missing lu_id/node_count
    CHECK_THROWS_AS(
        decode(R"({"type":"wake","seq":1,"ts":"2021-06-01T12:00:00Z","lu_id":"x","node_count":-2})"),
        DomainError);
}

TEST_CASE("encode rejects negative quantities") {
    Message msg{1, t0(), TelemetryReport{"lu-1", t0(), -0.1, 0.0, {}}};
    CHECK_THROWS_AS(encode(msg), DomainError);
}

TEST_CASE("topic patterns match single-segment wildcards") {
    CHECK(topic_matches("lu/+/telemetry", "lu/a/telemetry"));
    CHECK(topic_matches("lu/+/telemetry", "lu/lu-42/telemetry"));
    CHECK_FALSE(topic_matches("lu/+/telemetry", "lu/a/status"));
    CHECK_FALSE(topic_matches("lu/+/telemetry", "lu/a/b/telemetry"));
    CHECK(topic_matches("eb/offers", "eb/offers"));
    CHECK_FALSE(topic_matches("eb/offers", "eb/offers/x"));
    CHECK_THROWS_AS(topic_matches("lu//telemetry", "lu/a/telemetry"), DomainError);
}

TEST_CASE("bus delivers synchronously to all matching subscribers in order") {
    Bus bus;
    std::vector<std::string> log;
    bus.subscribe("lu/+/telemetry", [&](const std::string& topic, const Message& m) {
        log.push_back("sub1 " + topic + " " + std::to_string(m.seq));
    });
    bus.subscribe("lu/a/telemetry", [&](const std::string&, const Message& m) {
        log.push_back("sub2 " + std::to_string(m.seq));
    });

    Message m1{1, t0(), StatusReport{"a", {}}};
    Message m2{2, t0(), StatusReport{"a", {}}};
    CHECK(bus.publish("lu/a/telemetry", m1) == 2);
    CHECK(bus.publish("lu/b/telemetry", m2) == 1);

    REQUIRE(log.size() == 3);
    CHECK(log[0] == "sub1 lu/a/telemetry 1");
    CHECK(log[1] == "sub2 1");
    CHECK(log[2] == "sub1 lu/b/telemetry 2");
}

TEST_CASE("publishing with no subscribers succeeds and drops the message") {
    Bus bus;
    Message m{1, t0(), StatusReport{"a", {}}};
    CHECK(bus.publish("eb/forecast", m) == 0);
}

TEST_CASE("no retained messages for late subscribers") {
    Bus bus;
    Message m{1, t0(), StatusReport{"a", {}}};
    bus.publish("lu/a/telemetry", m);
    int seen = 0;
    bus.subscribe("lu/+/telemetry", [&](const std::string&, const Message&) { ++seen; });
    CHECK(seen == 0);
    bus.publish("lu/a/telemetry", m);
    CHECK(seen == 1);
}

TEST_CASE("closed bus rejects publish and subscribe") {
    Bus bus;
    bus.close();
    Message m{1, t0(), StatusReport{"a", {}}};
    CHECK_THROWS_AS(bus.publish("lu/a/x", m), LifecycleError);
    CHECK_THROWS_AS(bus.subscribe("lu/+/x", [](const std::string&, const Message&) {}),
                    LifecycleError);
}

TEST_CASE("per-sender sequence numbers are strictly increasing as observed") {
    Bus bus;
    std::map<std::string, std::vector<std::uint64_t>> seen;
    bus.subscribe("lu/+/telemetry", [&](const std::string&, const Message& m) {
        seen[std::get<StatusReport>(m.body).lu_id].push_back(m.seq);
    });

    std::map<std::string, Sequencer> senders;
    std::mt19937 rng(8);
    std::uniform_int_distribution<int> pick(0, 2);
    const std::string ids[] = {"a", "b", "c"};
    for (int i = 0; i < 300; ++i) {
        const std::string& id = ids[pick(rng)];
        bus.publish("lu/" + id + "/telemetry",
                    Message{senders[id].next(), t0(), StatusReport{id, {}}});
    }
    for (const auto& [id, seqs] : seen) {
        for (std::size_t i = 1; i < seqs.size(); ++i) CHECK(seqs[i] > seqs[i - 1]);
    }
}

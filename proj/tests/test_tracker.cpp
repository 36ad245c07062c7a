#include <gtest/gtest.h>

#include "manifest_check.hpp"
#include "poet/encode.hpp"
#include "poet/synth.hpp"
#include "poet/tracker.hpp"
#include "test_support.hpp"

using namespace poet;
using namespace poet::testing;

namespace {

Tracker run_bytes(const std::vector<std::uint8_t>& image, TrackerConfig config = {}) {
    CaptureReader reader = CaptureReader::from_bytes(image);
    return process_capture(reader, config);
}

RawFrame encoded(const LinkHeader& link, const FrameBody& body, std::uint64_t index) {
    return RawFrame{Timestamp{1700000000, static_cast<std::uint32_t>(index * 1000)}, encode_frame(link, body), index,
                    "test"};
}

}  // namespace

TEST(Tracker, CleanStartupReachesDataExchange) {
    ScenarioSpec spec = normal_startup_spec(2);
    Tracker t = run_tracker(synthesize(spec));
    EXPECT_EQ(t.anomaly_count(), 0u);
    EXPECT_EQ(t.diagnostic_count(), 0u);
    EXPECT_EQ(t.system().state(), system_state::kDataExchange);
    EXPECT_TRUE(t.all_connections_established_fired());
    for (const auto& d : spec.devices)
        EXPECT_EQ(t.devices().at(d.mac).state(), device_state::kDataExchange) << d.name;
    EXPECT_EQ(t.devices().at(spec.controller.mac).state(), device_state::kNeighbourhoodDetection);
    ASSERT_EQ(t.connections().size(), 2u);
    for (const auto& [key, c] : t.connections())
        EXPECT_TRUE(c.state() == connection_state::kInputDataExchange ||
                    c.state() == connection_state::kOutputDataExchange)
            << key << " " << c.state();
}

TEST(Tracker, InventoryMatchesConfiguredAssets) {
    ScenarioSpec spec = normal_startup_spec(5);
    Tracker t = run_tracker(synthesize(spec));
    for (const auto& d : spec.devices) {
        const AssetRecord* r = t.inventory().find(d.mac);
        ASSERT_TRUE(r) << d.name;
        EXPECT_EQ(r->name_of_station, d.name);
        EXPECT_EQ(r->ip_address, d.ip);
        EXPECT_EQ(r->role, AssetRole::Device);
        EXPECT_EQ(r->port_count, d.port_count);
    }
    const AssetRecord* ctl = t.inventory().find(spec.controller.mac);
    ASSERT_TRUE(ctl);
    EXPECT_EQ(ctl->role, AssetRole::Controller);
    EXPECT_EQ(ctl->ip_address, spec.controller.ip);
    EXPECT_EQ(t.inventory().size(), spec.devices.size() + 1);
}

TEST(Tracker, SinkSeesEveryAlertInOrder) {
    std::vector<AnomalyAlert> seen;
    SynthOutput out = synthesize(builtin_scenario("malformed-mix"));
    MemoryFrameSource src(out.raw_frames());
    Tracker t = process_capture(src, {}, [&](const AnomalyAlert& a) { seen.push_back(a); });
    EXPECT_EQ(seen, t.alerts());
    EXPECT_EQ(t.diagnostic_count(), 5u);
    for (std::size_t i = 1; i < seen.size(); ++i) EXPECT_LE(seen[i - 1].cause.capture_index, seen[i].cause.capture_index);
}

TEST(Tracker, RenameAttackIsFlagged) {
    ScenarioSpec spec = builtin_scenario("rename-attack");
    Tracker t = run_tracker(synthesize(spec));
    ASSERT_EQ(t.anomaly_count(), 1u);
    const AnomalyAlert* a = nullptr;
    for (const auto& x : t.alerts())
        if (x.severity == Severity::Anomaly) a = &x;
    ASSERT_TRUE(a);
    EXPECT_EQ(a->instance_kind, FsmKind::Device);
    EXPECT_EQ(a->offending_event, event::kNameSetRequested);
    EXPECT_EQ(a->state_at_event, device_state::kDataExchange);
    EXPECT_EQ(a->cause.protocol, "PN-DCP");
    EXPECT_FALSE(a->explanation.empty());
    EXPECT_EQ(t.inventory().find(spec.devices[1].mac)->name_of_station, "ufo");
}

TEST(Tracker, AlertJsonRoundTrips) {
    Tracker t = run_tracker(synthesize(builtin_scenario("rogue-connect")));
    ASSERT_FALSE(t.alerts().empty());
    for (const auto& a : t.alerts()) EXPECT_EQ(alert_from_json(to_json(a)), a);
}

TEST(Tracker, SystemNameIsTheSystemKey) {
    TrackerConfig config;
    config.system_name = "line-7";
    Tracker t = run_tracker(synthesize(normal_startup_spec(1)), config);
    EXPECT_EQ(t.system().key(), "line-7");
    EXPECT_EQ(t.report()["summary"]["system_name"], "line-7");
}

TEST(Tracker, EmptyCaptureStaysInactive) {
    MemoryFrameSource src({});
    Tracker t = process_capture(src);
    EXPECT_EQ(t.system().state(), system_state::kInactive);
    EXPECT_TRUE(t.alerts().empty());
    Json r = t.report();
    EXPECT_EQ(r["summary"]["frames"], 0);
    EXPECT_TRUE(r["summary"]["first_timestamp"].is_null());
    EXPECT_TRUE(r["final_states"]["devices"].empty());
}

TEST(Tracker, TruncatedCaptureKeepsEarlierFramesAndReportsIt) {
    SynthOutput out = synthesize(normal_startup_spec(1));
    auto image = encode_pcap(out.raw_frames());
    image.resize(image.size() - 7);
    Tracker t = run_bytes(image);
    EXPECT_EQ(t.report()["summary"]["frames"], out.frames.size() - 1);
    ASSERT_FALSE(t.alerts().empty());
    const AnomalyAlert& last = t.alerts().back();
    EXPECT_EQ(last.severity, Severity::Diagnostic);
    EXPECT_EQ(last.offending_event, diagnostic_kind::kCaptureError);
    EXPECT_FALSE(t.report()["summary"]["capture_error"].is_null());
}

TEST(Tracker, DeferredNameResolutionExpires) {
    TrackerConfig config;
    config.deferred_window = 3;
    MacAddress ctl = mac("00:0e:cf:10:00:00");
    DcpFrame req;
    req.xid = 5;
    req.response_delay = 1;
    req.blocks = {make_dcp_name_block("nobody", std::nullopt)};
    ArpPacket arp{ArpOperation::Request, ctl, {}, ip("192.168.0.1"), ip("192.168.0.2")};
    LinkHeader dcp_link{mac("01:0e:cf:00:00:00"), ctl, std::nullopt};
    LinkHeader arp_link{mac("ff:ff:ff:ff:ff:ff"), ctl, std::nullopt};
    std::vector<RawFrame> frames{encoded(dcp_link, req, 0)};
    for (std::uint64_t i = 1; i < 6; ++i) frames.push_back(encoded(arp_link, arp, i));
    MemoryFrameSource src(frames);
    Tracker t = process_capture(src, config);
    ASSERT_EQ(t.diagnostic_count(), 1u);
    EXPECT_EQ(t.alerts()[0].offending_event, diagnostic_kind::kDeferredExpired);
    EXPECT_EQ(t.report()["summary"]["pending_deferred_events"], 0);
}

TEST(Tracker, ReportShape) {
    Tracker t = run_tracker(synthesize(normal_startup_spec(2)));
    Json r = t.report();
    for (const char* k : {"summary", "final_states", "inventory", "alerts", "logs"}) EXPECT_TRUE(r.contains(k)) << k;
    EXPECT_EQ(r["summary"]["devices"], 3);
    EXPECT_EQ(r["summary"]["connections"], 2);
    EXPECT_GT(r["summary"]["frames_by_protocol"]["PNIO"].get<int>(), 0);
    EXPECT_EQ(r["logs"]["connections"].size(), 2u);
}

// Property: the final state of every instance equals the fold of its transition log.
TEST(TrackerProperty, FoldReproducesFinalStates) {
    for (const auto& name : builtin_scenario_names()) {
        Tracker t = run_tracker(synthesize(builtin_scenario(name)));
        EXPECT_EQ(fold_log(t.system().definition(), t.system().log()), t.system().state()) << name;
        for (const auto& [mac, inst] : t.devices())
            EXPECT_EQ(fold_log(inst.definition(), inst.log()), inst.state()) << name << " " << inst.key();
        for (const auto& [key, inst] : t.connections())
            EXPECT_EQ(fold_log(inst.definition(), inst.log()), inst.state()) << name << " " << key;
    }
}

// Property: same bytes, same report; container format and timestamp resolution do not matter.
TEST(TrackerProperty, DeterministicAcrossRunsAndFormats) {
    SynthOutput out = synthesize(builtin_scenario("rename-attack"));
    auto frames = out.raw_frames();
    Json a = normalize_timestamps(run_bytes(encode_pcap(frames)).report());
    Json b = normalize_timestamps(run_bytes(encode_pcap(frames)).report());
    EXPECT_EQ(a, b);
    EXPECT_EQ(run_bytes(encode_pcap(frames)).report(), run_bytes(encode_pcapng(frames, true)).report());
    EXPECT_EQ(run_bytes(encode_pcap(frames)).report(), run_bytes(encode_pcap(frames, {true, true, 65535})).report());
}

TEST(TrackerProperty, NormalizeStripsOnlyTimestamps) {
    Json doc{{"timestamp", "1.000000000"}, {"nested", {{"first_seen", "2.000000000"}, {"frames", 3}}}};
    Json n = normalize_timestamps(doc);
    EXPECT_EQ(n["timestamp"], "0.000000000");
    EXPECT_EQ(n["nested"]["first_seen"], "0.000000000");
    EXPECT_EQ(n["nested"]["frames"], 3);
}

class BuiltinManifest : public ::testing::TestWithParam<std::string> {};

TEST_P(BuiltinManifest, TrackerAgreesWithManifest) {
    SynthOutput out = synthesize(builtin_scenario(GetParam()));
    CaptureReader reader = CaptureReader::from_bytes(encode_pcap(out.raw_frames()));
    Tracker t = process_capture(reader);
    for (const auto& m : compare_with_manifest(t, out.manifest)) ADD_FAILURE() << m;
}

INSTANTIATE_TEST_SUITE_P(Tracker, BuiltinManifest, ::testing::ValuesIn(builtin_scenario_names()),
                         [](const auto& info) {
                             std::string n = info.param;
                             for (char& c : n)
                                 if (c == '-') c = '_';
                             return n;
                         });

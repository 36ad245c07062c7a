#include <gtest/gtest.h>

#include "manifest_check.hpp"
#include "poet/io_layout.hpp"
#include "poet/synth.hpp"
#include "test_support.hpp"

using namespace poet;
using namespace poet::testing;

namespace {

void expect_invalid(const ScenarioSpec& s, const std::string& needle) {
    try {
        validate_scenario(s);
        ADD_FAILURE() << "expected InvalidScenario mentioning '" << needle << "'";
    } catch (const InvalidScenario& e) {
        EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
}

}  // namespace

TEST(Synth, BuiltinsValidate) {
    EXPECT_GE(builtin_scenario_names().size(), 8u);
    for (const auto& n : builtin_scenario_names()) EXPECT_NO_THROW(validate_scenario(builtin_scenario(n))) << n;
    EXPECT_THROW(builtin_scenario("no-such-thing"), InvalidScenario);
}

TEST(Synth, RejectsDuplicateMac) {
    ScenarioSpec s = normal_startup_spec(2);
    s.devices[1].mac = s.devices[0].mac;
    EXPECT_THROW(validate_scenario(s), InvalidScenario);
    EXPECT_THROW(synthesize(s), InvalidScenario);
}

TEST(Synth, RejectsBadIdentities) {
    ScenarioSpec s = normal_startup_spec(2);
    s.devices[1].ip = s.devices[0].ip;
    EXPECT_THROW(validate_scenario(s), InvalidScenario);

    s = normal_startup_spec(2);
    s.devices[1].name = s.devices[0].name;
    EXPECT_THROW(validate_scenario(s), InvalidScenario);

    s = normal_startup_spec(1);
    s.devices[0].name = "Bad_Name";
    EXPECT_THROW(validate_scenario(s), InvalidScenario);

    s = normal_startup_spec(1);
    s.devices[0].mac = mac("01:00:5e:00:00:01");
    EXPECT_THROW(validate_scenario(s), InvalidScenario);

    s = normal_startup_spec(1);
    s.devices[0].submodules.clear();
    EXPECT_THROW(validate_scenario(s), InvalidScenario);

    s = normal_startup_spec(1);
    s.devices[0].submodules.push_back(s.devices[0].submodules[0]);
    EXPECT_THROW(validate_scenario(s), InvalidScenario);

    s = normal_startup_spec(1);
    s.timing.cycle_interval = 0;
    EXPECT_THROW(validate_scenario(s), InvalidScenario);
}

TEST(Synth, RejectsDanglingInjection) {
    ScenarioSpec s = normal_startup_spec(1);
    s.injections.push_back({InjectionKind::Rename, InjectionPosition::AfterCycle, 1, "ghost", "ufo", ""});
    expect_invalid(s, "ghost");
    s.injections = {{InjectionKind::Malformed, InjectionPosition::AfterCycle, 1, "", "", "SNMP"}};
    expect_invalid(s, "SNMP");
}

TEST(Synth, JsonRoundTrip) {
    for (const auto& n : builtin_scenario_names()) {
        ScenarioSpec s = builtin_scenario(n);
        Json doc = scenario_to_json(s);
        EXPECT_EQ(scenario_to_json(scenario_from_json(doc)), doc) << n;
    }
}

TEST(Synth, JsonDefaultsAndErrors) {
    Json minimal = Json::parse(R"({
        "name": "tiny",
        "controller": {"mac": "00:0e:cf:10:00:00", "name": "plc", "ip": "10.0.0.1"},
        "devices": [{"mac": "00:0e:cf:20:00:00", "name": "io-1", "ip": "10.0.0.2",
                     "submodules": [{"slot": 1, "subslot": 1, "direction": "input", "length": 2}]}]
    })");
    ScenarioSpec s = scenario_from_json(minimal);
    EXPECT_EQ(s.devices.size(), 1u);
    EXPECT_EQ(s.devices[0].port_count, 2u);
    EXPECT_EQ(s.timing.cycles, 10u);
    EXPECT_NO_THROW(synthesize(s));

    Json bad = minimal;
    bad["devices"][0]["mac"] = "not-a-mac";
    EXPECT_THROW(scenario_from_json(bad), InvalidScenario);
}

TEST(Synth, Deterministic) {
    for (const auto& n : builtin_scenario_names()) {
        SynthOutput a = synthesize(builtin_scenario(n));
        SynthOutput b = synthesize(builtin_scenario(n));
        EXPECT_EQ(a.raw_frames(), b.raw_frames()) << n;
        EXPECT_EQ(a.manifest, b.manifest) << n;
    }
}

TEST(Synth, SeedChangesArUuids) {
    ScenarioSpec s = normal_startup_spec(1);
    auto a = synthesize(s).raw_frames();
    s.seed += 1;
    auto b = synthesize(s).raw_frames();
    ASSERT_EQ(a.size(), b.size());
    EXPECT_NE(a, b);
}

TEST(Synth, ManifestShape) {
    SynthOutput out = synthesize(builtin_scenario("normal-startup"));
    const Json& m = out.manifest;
    ASSERT_EQ(m["frames"].size(), out.frames.size());
    for (std::size_t i = 0; i < out.frames.size(); ++i) {
        EXPECT_EQ(m["frames"][i]["index"], i);
        EXPECT_EQ(m["frames"][i]["timestamp"], out.frames[i].raw.timestamp.to_string());
        EXPECT_EQ(out.frames[i].raw.capture_index, i);
    }
    EXPECT_TRUE(m["expected"]["anomalies"].empty());
    EXPECT_TRUE(m["expected"]["all_connections_established"].get<bool>());
    EXPECT_EQ(m["expected"]["final_states"]["system"], system_state::kDataExchange);
    EXPECT_FALSE(m["process_data"].empty());
}

TEST(Synth, EmptyScenarioHasOnlyController) {
    SynthOutput out = synthesize(builtin_scenario("empty"));
    EXPECT_FALSE(out.frames.empty());
    Tracker t = run_tracker(out);
    EXPECT_EQ(t.anomaly_count(), 0u);
    EXPECT_TRUE(t.connections().empty());
}

TEST(Synth, FuzzCorpusIsDeterministic) {
    auto a = fuzz_corpus(3, 200);
    EXPECT_EQ(a.size(), 200u);
    EXPECT_EQ(a, fuzz_corpus(3, 200));
    EXPECT_NE(a, fuzz_corpus(4, 200));
}

// Property: timestamps never go backwards and sit on whole microseconds, so pcap keeps them exactly.
TEST(SynthProperty, TimestampsMonotonicAndMicrosecondAligned) {
    for (const auto& n : builtin_scenario_names()) {
        auto frames = synthesize(builtin_scenario(n)).raw_frames();
        for (std::size_t i = 0; i < frames.size(); ++i) {
            EXPECT_EQ(frames[i].timestamp.nanoseconds % 1000, 0u) << n << " frame " << i;
            if (i) EXPECT_LE(frames[i - 1].timestamp, frames[i].timestamp) << n << " frame " << i;
        }
    }
}

// Property: every frame with a planned body dissects back to exactly that body.
TEST(SynthProperty, PlannedBodiesSurviveTheWire) {
    for (const auto& n : builtin_scenario_names()) {
        for (const auto& f : synthesize(builtin_scenario(n)).frames) {
            DissectResult r = dissect(f.raw);
            if (!f.body) {
                EXPECT_TRUE(std::holds_alternative<MalformedFrame>(r)) << n << " " << f.intent;
                continue;
            }
            const auto* p = std::get_if<ParsedFrame>(&r);
            ASSERT_TRUE(p) << n << " " << f.intent << ": " << std::get<MalformedFrame>(r).reason;
            EXPECT_EQ(p->body, *f.body) << n << " " << f.intent;
        }
    }
}

// Property: the process values written into cyclic frames are what the IO layout extracts.
TEST(SynthProperty, ProcessDataMatchesExtraction) {
    for (const char* n : {"normal-5", "two-submodule", "normal-2-lldp"}) {
        SynthOutput out = synthesize(builtin_scenario(n));
        Tracker t = run_tracker(out);
        std::size_t checked = 0;
        for (const auto& f : out.frames) {
            if (f.process_values.empty()) continue;
            const auto* cyc = std::get_if<PnioCyclicFrame>(&*f.body);
            ASSERT_TRUE(cyc);
            const ConnectionInfo* conn = nullptr;
            for (const auto& [key, info] : t.context().connections)
                for (const auto& s : info.specs)
                    if (s.frame_id == cyc->frame_id) conn = &info;
            ASSERT_TRUE(conn) << n;
            auto slices = extract_process_data(*cyc, conn->specs);
            ASSERT_EQ(slices.size(), f.process_values.size()) << n;
            for (std::size_t i = 0; i < slices.size(); ++i) {
                EXPECT_EQ(slices[i].first.slot, f.process_values[i].slot);
                EXPECT_EQ(slices[i].first.subslot, f.process_values[i].subslot);
                EXPECT_EQ(slices[i].first.direction, f.process_values[i].direction);
                EXPECT_EQ(slices[i].second, f.process_values[i].bytes);
                ++checked;
            }
        }
        EXPECT_GT(checked, 0u) << n;
    }
}

// Property: for every device count, a clean startup is anomaly-free and fully established.
TEST(SynthProperty, NormalStartupScalesCleanly) {
    for (std::size_t n : {1u, 3u, 8u, 20u}) {
        for (bool lldp : {false, true}) {
            SynthOutput out = synthesize(normal_startup_spec(n, lldp));
            Tracker t = run_tracker(out);
            EXPECT_EQ(t.anomaly_count(), 0u) << n;
            EXPECT_EQ(t.connections().size(), n);
            EXPECT_EQ(t.system().state(), system_state::kDataExchange);
            for (const auto& m : compare_with_manifest(t, out.manifest)) ADD_FAILURE() << n << ": " << m;
        }
    }
}

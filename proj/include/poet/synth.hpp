#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "poet/capture.hpp"
#include "poet/dissect.hpp"
#include "poet/encode.hpp"
#include "poet/fsm.hpp"
#include "poet/models.hpp"

namespace poet {

struct SubmoduleSpec {
    std::uint16_t slot{1};
    std::uint16_t subslot{1};
    DataDirection direction{DataDirection::Input};
    std::uint16_t length{1};
    bool operator==(const SubmoduleSpec&) const = default;
};

struct ControllerSpec {
    MacAddress mac;
    std::string name;
    Ipv4Address ip;
    std::uint32_t port_count{1};
};

struct DeviceSpec {
    MacAddress mac;
    std::string name;
    Ipv4Address ip;
    std::vector<SubmoduleSpec> submodules;
    std::uint32_t port_count{2};
    std::uint16_t vendor_id{0x002A};
    std::uint16_t device_id{0x0101};
};

struct TimingSpec {
    /// Seconds between consecutive non-cyclic frames; kept on whole microseconds.
    double inter_frame_gap{0.0005};
    double cycle_interval{0.030};
    std::uint32_t cycles{10};
    Timestamp start{1700000000, 0};
};

enum class InjectionKind { Rename, RogueConnect, Malformed, OrphanWrite };
enum class InjectionPosition { AfterFrame, AfterCycle, BeforeConnect };

struct Injection {
    InjectionKind kind{InjectionKind::Rename};
    InjectionPosition position{InjectionPosition::AfterCycle};
    /// Frame index or cycle round, depending on `position`.
    std::uint64_t index{0};
    /// Device name for rename, rogue_connect and orphan_write.
    std::string target;
    std::string new_name;
    /// LLDP, ARP, PN-DCP, PN-CM or PNIO for malformed.
    std::string protocol;
};

struct ScenarioSpec {
    std::string name{"scenario"};
    std::uint64_t seed{1};
    ControllerSpec controller;
    std::vector<DeviceSpec> devices;
    TimingSpec timing;
    /// Re-advertise LLDP from every station after every N cycle rounds; 0 disables.
    std::uint32_t lldp_refresh_every{0};
    /// Extra LLDP rounds between the startup phases.
    bool lldp_during_startup{false};
    MacAddress attacker_mac;
    Ipv4Address attacker_ip;
    std::vector<Injection> injections;
};

class InvalidScenario : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

ScenarioSpec scenario_from_json(const Json& doc);
Json scenario_to_json(const ScenarioSpec& spec);
/// Throws InvalidScenario on duplicate identities, bad names or dangling injection targets.
void validate_scenario(const ScenarioSpec& spec);

struct IntendedEvent {
    FsmKind kind{FsmKind::Device};
    std::string key;
    std::string event;
    bool operator==(const IntendedEvent&) const = default;
};

struct ProcessValue {
    std::uint16_t frame_id{0};
    DataDirection direction{DataDirection::Input};
    std::uint16_t slot{0};
    std::uint16_t subslot{0};
    std::vector<std::uint8_t> bytes;
};

struct OpenedConnection {
    std::string key;
    std::string initiator;
    std::string responder;
};

struct SynthFrame {
    RawFrame raw;
    LinkHeader link;
    /// What the encoder was asked to emit; absent for deliberately malformed frames.
    std::optional<FrameBody> body;
    std::string intent;
    std::string subject;
    /// Device instance the tracker is expected to create for the sender, if any.
    std::optional<std::string> sender_instance;
    /// Events the frame should drive; after synthesis only those surviving system gating remain.
    std::vector<IntendedEvent> events;
    /// Connection opened by this frame.
    std::optional<OpenedConnection> opens_connection;
    std::vector<ProcessValue> process_values;
    std::vector<std::string> expected_diagnostics;
};

/// Ground truth for a synthesized capture: per-frame intents, expected anomalies and diagnostics,
/// final states and the process values written into cyclic frames.
struct SynthOutput {
    std::vector<SynthFrame> frames;
    Json manifest;

    std::vector<RawFrame> raw_frames() const;
};

SynthOutput synthesize(const ScenarioSpec& spec, const std::string& system_name = "poet-system");

/// Names accepted by builtin_scenario.
std::vector<std::string> builtin_scenario_names();
/// Throws InvalidScenario for unknown names.
ScenarioSpec builtin_scenario(const std::string& name);
/// 1 controller and `devices` devices with two submodules each.
ScenarioSpec normal_startup_spec(std::size_t devices, bool lldp_refresh = false);

/// Deterministic mix of random, truncated and bit-flipped frames.
std::vector<std::vector<std::uint8_t>> fuzz_corpus(std::uint64_t seed, std::size_t count);

}  // namespace poet

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "poet/capture.hpp"
#include "poet/derive.hpp"
#include "poet/dissect.hpp"
#include "poet/fsm.hpp"
#include "poet/inventory.hpp"
#include "poet/models.hpp"

namespace poet {

struct TrackerConfig {
    std::string system_name{"poet-system"};
    /// Frames a deferred-by-name event may wait before it is dropped as a diagnostic.
    std::uint64_t deferred_window{10000};
};

enum class Severity { Anomaly, Diagnostic };
std::string_view to_string(Severity s);

struct AnomalyAlert {
    Timestamp timestamp;
    FsmKind instance_kind{FsmKind::Device};
    std::string instance_key;
    std::string state_at_event;
    /// Rejected event name, or the diagnostic kind for diagnostics.
    std::string offending_event;
    FrameProvenance cause;
    std::string explanation;
    Severity severity{Severity::Anomaly};
    bool operator==(const AnomalyAlert&) const = default;
};

Json to_json(const AnomalyAlert& a);
AnomalyAlert alert_from_json(const Json& j);

using AlertSink = std::function<void(const AnomalyAlert&)>;

/// Sequential pipeline: dissect, inventory, derive, fire, evaluate composite events.
class Tracker {
public:
    explicit Tracker(TrackerConfig config = {}, AlertSink sink = {});

    void process(const RawFrame& frame);
    void report_capture_error(const CaptureError& error);
    void note_rejected_short_frames(std::uint64_t count) { short_frames_ += count; }

    const TrackerConfig& config() const { return config_; }
    const FsmInstance& system() const { return system_; }
    const std::map<MacAddress, FsmInstance>& devices() const { return devices_; }
    const std::map<std::string, FsmInstance>& connections() const { return connections_; }
    const AssetInventory& inventory() const { return inventory_; }
    const DerivationContext& context() const { return context_; }
    const std::vector<AnomalyAlert>& alerts() const { return alerts_; }
    std::size_t anomaly_count() const;
    std::size_t diagnostic_count() const;
    bool all_connections_established_fired() const { return composite_fired_; }

    /// System, then devices by MAC, then connections by key; each with its operation label.
    Json snapshot_states() const;
    Json report() const;

private:
    FsmInstance& device_instance(const MacAddress& mac);
    void fire(const ProtocolEvent& e, Timestamp ts, bool connection_is_new);
    void record(FsmInstance& inst, FsmKind kind, const TransitionRecord& r);
    void diagnostic(FsmKind kind, const std::string& key, const std::string& state, const std::string& what,
                    const std::string& explanation, const FrameProvenance& cause, Timestamp ts);
    void diagnostic(const Diagnostic& d, Timestamp ts);
    void emit(AnomalyAlert a);
    void evaluate_composite(const FrameProvenance& cause, Timestamp ts);
    std::string system_operation() const;

    TrackerConfig config_;
    AlertSink sink_;
    FsmInstance system_;
    std::map<MacAddress, FsmInstance> devices_;
    std::map<std::string, FsmInstance> connections_;
    AssetInventory inventory_;
    DerivationContext context_;
    std::vector<AnomalyAlert> alerts_;
    bool composite_fired_{false};

    std::uint64_t frames_{0};
    std::uint64_t bytes_{0};
    std::uint64_t malformed_{0};
    std::uint64_t short_frames_{0};
    std::map<std::string, std::uint64_t> by_protocol_;
    std::optional<Timestamp> first_ts_;
    std::optional<Timestamp> last_ts_;
    std::optional<CaptureError> capture_error_;
};

/// Drains `source` through a fresh tracker, then reports any capture error.
Tracker process_capture(FrameSource& source, const TrackerConfig& config = {}, AlertSink sink = {});

/// Copy of `doc` with every timestamp-valued field replaced by a fixed value.
Json normalize_timestamps(const Json& doc);

/// Explanation text for a rejected transition.
std::string explain_rejection(FsmKind kind, const std::string& state, const std::string& event);

}  // namespace poet

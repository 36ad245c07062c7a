#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "poet/dissect.hpp"
#include "poet/inventory.hpp"
#include "poet/io_layout.hpp"
#include "poet/models.hpp"

namespace poet {

struct ProtocolEvent {
    std::string event_name;
    FsmKind target{FsmKind::Device};
    /// Device the event drives; for connection and system events, the device involved.
    MacAddress subject_mac;
    std::optional<MacAddress> peer_mac;
    std::optional<std::string> connection_key;
    /// Set while the subject is still unknown and the event waits for a name binding.
    std::optional<std::string> deferred_name;
    std::string detail;
    FrameProvenance cause;
    bool operator==(const ProtocolEvent&) const = default;
};

/// "initiatorhex-responderhex", lowercase.
std::string make_connection_key(const MacAddress& initiator, const MacAddress& responder);

struct Diagnostic {
    std::string kind;
    std::string message;
    std::optional<MacAddress> subject;
    std::optional<std::string> connection_key;
    FrameProvenance cause;
    bool operator==(const Diagnostic&) const = default;
};

namespace diagnostic_kind {
inline const std::string kMalformedFrame = "malformed_frame";
inline const std::string kOrphanFrame = "orphan_frame";
inline const std::string kInventoryConflict = "inventory_conflict";
inline const std::string kProtocolViolation = "protocol_violation";
inline const std::string kDeferredExpired = "deferred_expired";
inline const std::string kCaptureError = "capture_error";
inline const std::string kInconsistentConnect = "inconsistent_connect";
inline const std::string kRejectedConnect = "rejected_connect";
}  // namespace diagnostic_kind

struct ConnectionInfo {
    std::string key;
    MacAddress initiator;
    MacAddress responder;
    Uuid ar_uuid;
    std::vector<IoDataSpec> specs;
    std::vector<CrLayout> crs;
    bool operator==(const ConnectionInfo&) const = default;
};

struct CyclicRoute {
    std::string connection_key;
    /// Input CRs travel device to controller.
    IoCrType type{IoCrType::Input};
    bool operator==(const CyclicRoute&) const = default;
};

using CyclicRouteKey = std::tuple<std::uint16_t, MacAddress, MacAddress>;

struct PendingSet {
    MacAddress target;
    bool carries_ip{false};
    bool operator==(const PendingSet&) const = default;
};

struct DeferredEvent {
    ProtocolEvent event;
    std::uint64_t frame_ordinal{0};
    bool operator==(const DeferredEvent&) const = default;
};

/// Registries consulted by derive_events and updated only through apply_derivation.
struct DerivationContext {
    std::map<std::string, ConnectionInfo> connections;
    std::map<Uuid, std::string> ar_index;
    std::map<CyclicRouteKey, CyclicRoute> cyclic_routes;
    std::map<std::uint32_t, PendingSet> pending_sets;
    std::map<std::uint32_t, std::string> pending_identify;
    std::vector<DeferredEvent> deferred;
    std::set<CyclicRouteKey> reported_orphans;
};

/// Current FSM states as seen by the deriver. Absent device means no instance yet.
struct StateView {
    std::function<std::optional<std::string>(const MacAddress&)> device_state;
    std::function<std::optional<std::string>(const std::string&)> connection_state;
    std::string system_state;
};

struct Derivation {
    std::vector<ProtocolEvent> events;
    std::vector<Diagnostic> diagnostics;

    // Registry effects, applied by apply_derivation.
    std::optional<ConnectionInfo> open_connection;
    std::optional<ConnectionInfo> update_connection;
    std::vector<ProtocolEvent> defer;
    std::optional<std::string> release_deferred_name;
    std::optional<std::pair<std::uint32_t, PendingSet>> add_pending_set;
    std::optional<std::uint32_t> clear_pending_set;
    std::optional<std::pair<std::uint32_t, std::string>> add_pending_identify;
    std::optional<std::uint32_t> clear_pending_identify;
    std::optional<CyclicRouteKey> orphan_reported;
};

/// Maps one dissected frame to FSM events. Pure: reads `ctx`, `inventory` and `states` only.
Derivation derive_events(const ParsedFrame& frame, const DerivationContext& ctx, const AssetInventory& inventory,
                         const StateView& states);

void apply_derivation(DerivationContext& ctx, const Derivation& d, std::uint64_t frame_ordinal);

/// Removes deferred events older than `window` frames and returns them.
std::vector<DeferredEvent> expire_deferred(DerivationContext& ctx, std::uint64_t frame_ordinal, std::uint64_t window);

/// Cyclic routes implied by a connection's CRs.
std::vector<std::pair<CyclicRouteKey, CyclicRoute>> routes_for(const ConnectionInfo& info);

}  // namespace poet

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "poet/dissect.hpp"
#include "poet/fsm.hpp"

namespace poet {

enum class AssetRole { Unknown, Controller, Device, Supervisor };
std::string_view to_string(AssetRole r);
std::optional<AssetRole> parse_asset_role(std::string_view text);

struct FieldProvenance {
    std::string protocol;
    std::uint64_t capture_index{0};
    bool operator==(const FieldProvenance&) const = default;
};

struct AssetRecord {
    MacAddress interface_mac;
    std::optional<std::string> name_of_station;
    std::set<MacAddress> port_macs;
    /// Distinct LLDP port identifiers advertised by this asset.
    std::uint32_t port_count{0};
    std::optional<Ipv4Address> ip_address;
    std::optional<Ipv4Address> subnet;
    std::optional<Ipv4Address> gateway;
    AssetRole role{AssetRole::Unknown};
    Timestamp first_seen;
    Timestamp last_seen;
    std::map<std::string, FieldProvenance> provenance;
    bool operator==(const AssetRecord&) const = default;
};

struct InventoryChange {
    MacAddress mac;
    std::string field;
    std::optional<std::string> old_value;
    std::string new_value;
    /// A present value was replaced by a different one.
    bool conflict{false};
    FieldProvenance provenance;
    bool operator==(const InventoryChange&) const = default;
};

/// Passive asset store keyed by interface MAC. Frames from known port MACs resolve to
/// the owning interface.
class AssetInventory {
public:
    std::vector<InventoryChange> update_from_frame(const ParsedFrame& frame, Timestamp timestamp);

    const std::map<MacAddress, AssetRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    const AssetRecord* find(const MacAddress& mac) const;
    /// Interface MAC owning `mac` (itself if it is an interface), if known.
    std::optional<MacAddress> interface_for(const MacAddress& mac) const;
    std::optional<MacAddress> mac_for_name(std::string_view name) const;

    Json export_document() const;
    static AssetInventory from_document(const Json& doc);

private:
    AssetRecord& ensure(const MacAddress& mac, Timestamp ts, const FieldProvenance& prov,
                        std::vector<InventoryChange>& changes);
    void touch(const MacAddress& mac, Timestamp ts);

    std::map<MacAddress, AssetRecord> records_;
    std::map<MacAddress, MacAddress> port_owner_;
    std::map<MacAddress, std::set<std::string>> port_ids_;
};

Json to_json(const AssetRecord& r);
AssetRecord asset_from_json(const Json& j);
Json to_json(const InventoryChange& c);

}  // namespace poet

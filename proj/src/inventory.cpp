#include "poet/inventory.hpp"

#include <stdexcept>

namespace poet {

std::string_view to_string(AssetRole r) {
    switch (r) {
        case AssetRole::Unknown: return "unknown";
        case AssetRole::Controller: return "controller";
        case AssetRole::Device: return "device";
        case AssetRole::Supervisor: return "supervisor";
    }
    return "unknown";
}

std::optional<AssetRole> parse_asset_role(std::string_view text) {
    if (text == "unknown") return AssetRole::Unknown;
    if (text == "controller") return AssetRole::Controller;
    if (text == "device") return AssetRole::Device;
    if (text == "supervisor") return AssetRole::Supervisor;
    return std::nullopt;
}

namespace {

std::string text_of(const std::string& s) { return s; }
std::string text_of(const Ipv4Address& a) { return a.to_string(); }
std::string text_of(AssetRole r) { return std::string(to_string(r)); }

template <class T>
void assign(AssetRecord& rec, const std::string& field, std::optional<T>& slot, const T& value,
            const FieldProvenance& prov, std::vector<InventoryChange>& changes) {
    if (slot && *slot == value) return;
    InventoryChange c;
    c.mac = rec.interface_mac;
    c.field = field;
    if (slot) c.old_value = text_of(*slot);
    c.new_value = text_of(value);
    c.conflict = slot.has_value();
    c.provenance = prov;
    slot = value;
    rec.provenance[field] = prov;
    changes.push_back(std::move(c));
}

void assign_role(AssetRecord& rec, AssetRole role, const FieldProvenance& prov, std::vector<InventoryChange>& changes) {
    if (rec.role == role) return;
    InventoryChange c;
    c.mac = rec.interface_mac;
    c.field = "role";
    c.conflict = rec.role != AssetRole::Unknown;
    if (c.conflict) c.old_value = text_of(rec.role);
    c.new_value = text_of(role);
    c.provenance = prov;
    rec.role = role;
    rec.provenance["role"] = prov;
    changes.push_back(std::move(c));
}

void assign_ip(AssetRecord& rec, const DcpIpParameter& ip, const FieldProvenance& prov,
               std::vector<InventoryChange>& changes) {
    if (ip.ip.is_unspecified()) return;
    assign(rec, "ip_address", rec.ip_address, ip.ip, prov, changes);
    assign(rec, "subnet", rec.subnet, ip.subnet, prov, changes);
    if (!ip.gateway.is_unspecified()) assign(rec, "gateway", rec.gateway, ip.gateway, prov, changes);
}

std::optional<Ipv4Address> ip_field(const Json& j, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    auto ip = Ipv4Address::parse(j.at(key).get<std::string>());
    if (!ip) throw std::invalid_argument(std::string("bad ") + key);
    return ip;
}

MacAddress mac_field(const Json& j) {
    auto m = MacAddress::parse(j.get<std::string>());
    if (!m) throw std::invalid_argument("bad MAC '" + j.get<std::string>() + "'");
    return *m;
}

Timestamp ts_field(const Json& j) {
    auto t = Timestamp::parse(j.get<std::string>());
    if (!t) throw std::invalid_argument("bad timestamp");
    return *t;
}

}  // namespace

const AssetRecord* AssetInventory::find(const MacAddress& mac) const {
    auto it = records_.find(mac);
    return it == records_.end() ? nullptr : &it->second;
}

std::optional<MacAddress> AssetInventory::interface_for(const MacAddress& mac) const {
    if (records_.count(mac)) return mac;
    if (auto it = port_owner_.find(mac); it != port_owner_.end()) return it->second;
    return std::nullopt;
}

std::optional<MacAddress> AssetInventory::mac_for_name(std::string_view name) const {
    for (const auto& [mac, rec] : records_)
        if (rec.name_of_station && *rec.name_of_station == name) return mac;
    return std::nullopt;
}

AssetRecord& AssetInventory::ensure(const MacAddress& mac, Timestamp ts, const FieldProvenance& prov,
                                    std::vector<InventoryChange>& changes) {
    auto [it, fresh] = records_.try_emplace(mac);
    AssetRecord& rec = it->second;
    if (fresh) {
        rec.interface_mac = mac;
        rec.first_seen = ts;
        rec.last_seen = ts;
        rec.provenance["interface_mac"] = prov;
        changes.push_back({mac, "interface_mac", std::nullopt, mac.to_string(), false, prov});
    }
    return rec;
}

void AssetInventory::touch(const MacAddress& mac, Timestamp ts) {
    auto owner = interface_for(mac);
    if (!owner) return;
    AssetRecord& rec = records_.at(*owner);
    if (ts > rec.last_seen) rec.last_seen = ts;
}

std::vector<InventoryChange> AssetInventory::update_from_frame(const ParsedFrame& frame, Timestamp ts) {
    std::vector<InventoryChange> changes;
    FieldProvenance prov{std::string(protocol_name(frame.body)), frame.capture_index};
    const MacAddress& src = frame.envelope.src_mac;
    auto resolve = [&](const MacAddress& m) { return interface_for(m).value_or(m); };

    if (const auto* lldp = frame.as<LldpFrame>()) {
        MacAddress iface = lldp->chassis_mac().value_or(src);
        if (iface.is_zero()) iface = src;
        AssetRecord& rec = ensure(iface, ts, prov, changes);
        if (src != iface && !records_.count(src) && !rec.port_macs.count(src)) {
            rec.port_macs.insert(src);
            port_owner_[src] = iface;
            rec.provenance["port_macs"] = prov;
            changes.push_back({iface, "port_macs", std::nullopt, src.to_string(), false, prov});
        }
        std::string port_key = std::to_string(lldp->port_id.subtype) + ":" +
                               to_hex_string(lldp->port_id.value.data(), lldp->port_id.value.size());
        auto& ids = port_ids_[iface];
        ids.insert(port_key);
        if (ids.size() > rec.port_count) {
            InventoryChange c{iface, "port_count", std::nullopt, std::to_string(ids.size()), false, prov};
            if (rec.port_count) c.old_value = std::to_string(rec.port_count);
            rec.port_count = static_cast<std::uint32_t>(ids.size());
            rec.provenance["port_count"] = prov;
            changes.push_back(std::move(c));
        }
        if (lldp->station_name) assign(rec, "name_of_station", rec.name_of_station, *lldp->station_name, prov, changes);
        if (lldp->management_address && !lldp->management_address->is_unspecified())
            assign(rec, "ip_address", rec.ip_address, *lldp->management_address, prov, changes);
    } else if (const auto* arp = frame.as<ArpPacket>()) {
        if (auto owner = interface_for(arp->sender_mac); owner && !arp->sender_ip.is_unspecified()) {
            AssetRecord& rec = records_.at(*owner);
            assign(rec, "ip_address", rec.ip_address, arp->sender_ip, prov, changes);
        }
    } else if (const auto* dcp = frame.as<DcpFrame>()) {
        AssetRecord& self = ensure(resolve(src), ts, prov, changes);
        bool request = dcp->service_type == DcpServiceType::Request;
        bool announces = (!request && dcp->service_id == DcpServiceId::Identify) ||
                         (request && dcp->service_id == DcpServiceId::Hello);
        if (announces) {
            assign_role(self, AssetRole::Device, prov, changes);
            if (auto name = dcp->name_of_station()) assign(self, "name_of_station", self.name_of_station, *name, prov, changes);
            if (auto ip = dcp->ip_parameter()) assign_ip(self, *ip, prov, changes);
        } else if (request && dcp->service_id == DcpServiceId::Set) {
            assign_role(self, AssetRole::Controller, prov, changes);
            const MacAddress& dst = frame.envelope.dst_mac;
            if (!dst.is_multicast() && !dst.is_zero()) {
                AssetRecord& target = ensure(resolve(dst), ts, prov, changes);
                if (auto name = dcp->name_of_station())
                    assign(target, "name_of_station", target.name_of_station, *name, prov, changes);
                if (auto ip = dcp->ip_parameter()) assign_ip(target, *ip, prov, changes);
            }
        } else if (!request && dcp->service_id == DcpServiceId::Set) {
            assign_role(self, AssetRole::Device, prov, changes);
        }
    } else if (const auto* cm = frame.as<CmFrame>()) {
        AssetRecord& self = ensure(resolve(src), ts, prov, changes);
        if (!self.ip_address && !cm->udp.src_ip.is_unspecified())
            assign(self, "ip_address", self.ip_address, cm->udp.src_ip, prov, changes);
        if (cm->operation == CmOperation::Connect)
            assign_role(self, cm->direction == CmDirection::Request ? AssetRole::Controller : AssetRole::Device, prov,
                        changes);
    } else if (frame.as<PnioCyclicFrame>()) {
        ensure(resolve(src), ts, prov, changes);
    }
    touch(src, ts);
    return changes;
}

Json to_json(const AssetRecord& r) {
    Json j;
    j["interface_mac"] = r.interface_mac.to_string();
    if (r.name_of_station) j["name_of_station"] = *r.name_of_station;
    if (r.ip_address) j["ip_address"] = r.ip_address->to_string();
    if (r.subnet) j["subnet"] = r.subnet->to_string();
    if (r.gateway) j["gateway"] = r.gateway->to_string();
    Json ports = Json::array();
    for (const auto& m : r.port_macs) ports.push_back(m.to_string());
    j["port_macs"] = std::move(ports);
    j["port_count"] = r.port_count;
    j["role"] = to_string(r.role);
    j["first_seen"] = r.first_seen.to_string();
    j["last_seen"] = r.last_seen.to_string();
    Json prov = Json::object();
    for (const auto& [field, p] : r.provenance)
        prov[field] = Json{{"protocol", p.protocol}, {"capture_index", p.capture_index}};
    j["provenance"] = std::move(prov);
    return j;
}

AssetRecord asset_from_json(const Json& j) {
    AssetRecord r;
    r.interface_mac = mac_field(j.at("interface_mac"));
    if (j.contains("name_of_station")) r.name_of_station = j.at("name_of_station").get<std::string>();
    r.ip_address = ip_field(j, "ip_address");
    r.subnet = ip_field(j, "subnet");
    r.gateway = ip_field(j, "gateway");
    for (const auto& m : j.at("port_macs")) r.port_macs.insert(mac_field(m));
    r.port_count = j.at("port_count").get<std::uint32_t>();
    auto role = parse_asset_role(j.at("role").get<std::string>());
    if (!role) throw std::invalid_argument("bad role");
    r.role = *role;
    r.first_seen = ts_field(j.at("first_seen"));
    r.last_seen = ts_field(j.at("last_seen"));
    for (const auto& [field, p] : j.at("provenance").items())
        r.provenance[field] = {p.at("protocol").get<std::string>(), p.at("capture_index").get<std::uint64_t>()};
    return r;
}

Json to_json(const InventoryChange& c) {
    Json j{{"mac", c.mac.to_string()}, {"field", c.field}};
    j["old_value"] = c.old_value ? Json(*c.old_value) : Json(nullptr);
    j["new_value"] = c.new_value;
    j["conflict"] = c.conflict;
    j["provenance"] = Json{{"protocol", c.provenance.protocol}, {"capture_index", c.provenance.capture_index}};
    return j;
}

Json AssetInventory::export_document() const {
    Json assets = Json::array();
    for (const auto& [mac, rec] : records_) assets.push_back(to_json(rec));
    return Json{{"assets", std::move(assets)}};
}

AssetInventory AssetInventory::from_document(const Json& doc) {
    AssetInventory inv;
    for (const auto& a : doc.at("assets")) {
        AssetRecord r = asset_from_json(a);
        for (const auto& p : r.port_macs) inv.port_owner_[p] = r.interface_mac;
        inv.records_[r.interface_mac] = std::move(r);
    }
    return inv;
}

}  // namespace poet

#include "poet/derive.hpp"

#include <algorithm>
#include <cstdio>

namespace poet {

namespace ds = device_state;
namespace cs = connection_state;
namespace ss = system_state;

std::string make_connection_key(const MacAddress& initiator, const MacAddress& responder) {
    return initiator.to_hex() + "-" + responder.to_hex();
}

std::vector<std::pair<CyclicRouteKey, CyclicRoute>> routes_for(const ConnectionInfo& info) {
    std::vector<std::pair<CyclicRouteKey, CyclicRoute>> out;
    for (const auto& cr : info.crs) {
        bool input = cr.type == IoCrType::Input;
        const MacAddress& src = input ? info.responder : info.initiator;
        const MacAddress& dst = input ? info.initiator : info.responder;
        out.push_back({{cr.frame_id, src, dst}, {info.key, cr.type}});
    }
    return out;
}

namespace {

class Builder {
public:
    Builder(const ParsedFrame& frame, const DerivationContext& ctx, const AssetInventory& inv, const StateView& sv)
        : frame_(frame), ctx_(ctx), inv_(inv), sv_(sv) {
        cause_ = {frame.capture_index, std::string(protocol_name(frame.body)), summarize(frame)};
    }

    Derivation run() {
        std::visit([this](const auto& body) { on(body); }, frame_.body);
        return std::move(out_);
    }

private:
    MacAddress resolve(const MacAddress& m) const { return inv_.interface_for(m).value_or(m); }

    std::string device_state(const MacAddress& m) const {
        return sv_.device_state ? sv_.device_state(m).value_or(ds::kActive) : ds::kActive;
    }
    bool has_device(const MacAddress& m) const { return sv_.device_state && sv_.device_state(m).has_value(); }
    std::string connection_state(const std::string& key) const {
        return sv_.connection_state ? sv_.connection_state(key).value_or(cs::kConnectionCreation)
                                    : cs::kConnectionCreation;
    }

    ProtocolEvent make(const std::string& name, FsmKind target, const MacAddress& subject, std::string detail = {}) {
        ProtocolEvent e;
        e.event_name = name;
        e.target = target;
        e.subject_mac = subject;
        e.detail = std::move(detail);
        e.cause = cause_;
        return e;
    }
    void device(const std::string& name, const MacAddress& subject, std::optional<MacAddress> peer = {},
                std::string detail = {}) {
        auto e = make(name, FsmKind::Device, subject, std::move(detail));
        e.peer_mac = peer;
        out_.events.push_back(std::move(e));
    }
    void connection(const std::string& name, const ConnectionInfo& info) {
        auto e = make(name, FsmKind::Connection, info.responder);
        e.peer_mac = info.initiator;
        e.connection_key = info.key;
        out_.events.push_back(std::move(e));
    }
    void system(const std::string& name, const MacAddress& subject) {
        out_.events.push_back(make(name, FsmKind::System, subject));
    }
    void pn_traffic(const MacAddress& subject) {
        if (sv_.system_state == ss::kInactive || sv_.system_state == ss::kPoweredOn)
            system(event::kPnTrafficDetected, subject);
    }
    void system_in_exchange(const std::string& name, const MacAddress& subject) {
        if (sv_.system_state == ss::kDataExchange) system(name, subject);
    }
    void diagnose(const std::string& kind, std::string message, std::optional<MacAddress> subject = {},
                  std::optional<std::string> key = {}) {
        out_.diagnostics.push_back({kind, std::move(message), subject, std::move(key), cause_});
    }

    void on(const LldpFrame& f) {
        MacAddress iface = f.chassis_mac().value_or(frame_.envelope.src_mac);
        if (iface.is_zero()) iface = frame_.envelope.src_mac;
        for (const auto& v : f.violations()) diagnose(diagnostic_kind::kProtocolViolation, "LLDP: " + v, iface);
        if (f.ttl_seconds == 0) return;
        device(event::kDetectNeighbours, iface, std::nullopt, f.station_name.value_or(""));
        pn_traffic(iface);
    }

    void on(const ArpPacket& p) {
        if (!p.is_gratuitous()) return;
        MacAddress subject = resolve(p.sender_mac);
        if (has_device(subject)) device(event::kDuplicationCheck, subject, std::nullopt, p.sender_ip.to_string());
    }

    void on(const DcpFrame& f) {
        const MacAddress src = resolve(frame_.envelope.src_mac);
        for (const auto& v : f.violations()) diagnose(diagnostic_kind::kProtocolViolation, "DCP: " + v, src);
        bool request = f.service_type == DcpServiceType::Request;

        if (f.service_id == DcpServiceId::Identify && request) {
            pn_traffic(src);
            auto name = f.name_of_station();
            if (!name) return;
            out_.add_pending_identify = {f.xid, *name};
            if (auto bound = inv_.mac_for_name(*name)) {
                device(event::kNameResolutionRequested, *bound, src, *name);
            } else {
                auto e = make(event::kNameResolutionRequested, FsmKind::Device, MacAddress{}, *name);
                e.peer_mac = src;
                e.deferred_name = *name;
                out_.defer.push_back(std::move(e));
            }
            return;
        }
        if (f.service_id == DcpServiceId::Identify) {
            auto it = ctx_.pending_identify.find(f.xid);
            if (it == ctx_.pending_identify.end()) return;
            auto name = f.name_of_station();
            if (name && *name != it->second) return;
            for (const auto& d : ctx_.deferred) {
                if (d.event.deferred_name != it->second) continue;
                ProtocolEvent e = d.event;
                e.subject_mac = src;
                e.deferred_name.reset();
                out_.events.push_back(std::move(e));
            }
            out_.release_deferred_name = it->second;
            out_.clear_pending_identify = f.xid;
            device(event::kNameResolved, src, std::nullopt, it->second);
            return;
        }
        if (f.service_id == DcpServiceId::Set && request) {
            const MacAddress& dst_raw = frame_.envelope.dst_mac;
            if (dst_raw.is_multicast()) return;
            MacAddress target = resolve(dst_raw);
            bool carries_ip = false;
            for (const auto& b : f.blocks) {
                if (b.option == dcp::kOptionIp && (b.suboption == dcp::kSubIpParameter || b.suboption == dcp::kSubIpFullSuite)) {
                    carries_ip = true;
                    auto ip = f.ip_parameter();
                    std::string detail = ip ? ip->ip.to_string() : "";
                    bool established = device_is_established(device_state(target));
                    device(established ? event::kIpSetOnEstablished : event::kIpAssignmentRequested, target, src, detail);
                } else if (b.option == dcp::kOptionDeviceProperties && b.suboption == dcp::kSubNameOfStation) {
                    device(event::kNameSetRequested, target, src, f.name_of_station().value_or(""));
                }
            }
            out_.add_pending_set = {f.xid, PendingSet{target, carries_ip}};
            return;
        }
        if (f.service_id == DcpServiceId::Set) {
            auto it = ctx_.pending_sets.find(f.xid);
            if (it == ctx_.pending_sets.end() || it->second.target != src) return;
            out_.clear_pending_set = f.xid;
            if (it->second.carries_ip && f.service_type == DcpServiceType::ResponseSuccess)
                device(event::kIpAssigned, src);
        }
    }

    const ConnectionInfo* by_ar(const Uuid& ar) const {
        auto it = ctx_.ar_index.find(ar);
        if (it == ctx_.ar_index.end()) return nullptr;
        auto c = ctx_.connections.find(it->second);
        return c == ctx_.connections.end() ? nullptr : &c->second;
    }

    void on(const CmFrame& f) {
        const MacAddress src = resolve(frame_.envelope.src_mac);
        const MacAddress dst = resolve(frame_.envelope.dst_mac);
        bool request = f.direction == CmDirection::Request;

        if (f.operation == CmOperation::Connect && request) {
            ConnectionInfo info;
            info.initiator = src;
            info.responder = dst;
            info.key = make_connection_key(src, dst);
            info.ar_uuid = f.ar_uuid;
            try {
                IoLayout layout = layout_io(f);
                info.specs = std::move(layout.specs);
                info.crs = std::move(layout.crs);
            } catch (const InconsistentConnect& e) {
                diagnose(diagnostic_kind::kInconsistentConnect, e.what(), dst, info.key);
            }
            device(event::kConnectRequested, dst, src, f.ar_uuid.to_string());
            system(event::kConnectRequested, dst);
            out_.open_connection = std::move(info);
            return;
        }

        const ConnectionInfo* conn = by_ar(f.ar_uuid);
        if (!conn) {
            if (f.operation == CmOperation::Release) return;
            diagnose(diagnostic_kind::kOrphanFrame,
                     "PN-CM " + std::string(to_string(f.operation)) + (request ? " request" : " response") +
                         " for unknown AR " + f.ar_uuid.to_string(),
                     request ? dst : src);
            return;
        }
        const MacAddress& dev = conn->responder;
        std::string cstate = connection_state(conn->key);

        switch (f.operation) {
            case CmOperation::Connect: {
                if (f.iocr_responses.empty()) return;
                ConnectionInfo updated = *conn;
                apply_frame_ids(updated.specs, f);
                for (auto& cr : updated.crs)
                    for (const auto& r : f.iocr_responses)
                        if (r.reference == cr.reference) cr.frame_id = r.frame_id;
                if (!(updated == *conn)) out_.update_connection = std::move(updated);
                return;
            }
            case CmOperation::Write:
                if (request) {
                    const std::string& name =
                        connection_is_established(cstate) ? event::kAcyclicWrite : event::kParametrizationWrite;
                    device(name, dev, conn->initiator);
                    connection(name, *conn);
                    if (name == event::kAcyclicWrite) system_in_exchange(name, dev);
                } else {
                    acyclic_done(*conn, cstate);
                }
                return;
            case CmOperation::Read:
                if (request) {
                    device(event::kAcyclicRead, dev, conn->initiator);
                    connection(event::kAcyclicRead, *conn);
                    system_in_exchange(event::kAcyclicRead, dev);
                } else {
                    acyclic_done(*conn, cstate);
                }
                return;
            case CmOperation::DControl:
                if (request) {
                    device(event::kEndOfParametrization, dev, conn->initiator);
                    connection(event::kEndOfParametrization, *conn);
                }
                return;
            case CmOperation::CControl:
                if (request) {
                    device(event::kApplicationReady, dev, conn->initiator);
                    connection(event::kApplicationReady, *conn);
                } else {
                    device(event::kConnectionConfirmed, dev, conn->initiator);
                }
                return;
            case CmOperation::Release: return;
        }
    }

    void acyclic_done(const ConnectionInfo& conn, const std::string& cstate) {
        if (cstate != cs::kAcyclicParametrization && cstate != cs::kAcyclicReadingData) return;
        device(event::kAcyclicDone, conn.responder, conn.initiator);
        connection(event::kAcyclicDone, conn);
        system_in_exchange(event::kAcyclicDone, conn.responder);
    }

    void on(const PnioCyclicFrame& f) {
        CyclicRouteKey key{f.frame_id, frame_.envelope.src_mac, frame_.envelope.dst_mac};
        auto it = ctx_.cyclic_routes.find(key);
        const ConnectionInfo* conn = nullptr;
        if (it != ctx_.cyclic_routes.end()) {
            auto c = ctx_.connections.find(it->second.connection_key);
            if (c != ctx_.connections.end()) conn = &c->second;
        }
        if (!conn) {
            if (ctx_.reported_orphans.count(key)) return;
            char id[8];
            std::snprintf(id, sizeof id, "0x%04x", f.frame_id);
            diagnose(diagnostic_kind::kOrphanFrame,
                     std::string("PNIO frame ") + id + " from " + frame_.envelope.src_mac.to_string() + " to " +
                         frame_.envelope.dst_mac.to_string() + " matches no connection",
                     resolve(frame_.envelope.src_mac));
            out_.orphan_reported = key;
            return;
        }
        if (evaluate_iops(f, conn->specs) != IopsSummary::Good) return;
        bool input = it->second.type == IoCrType::Input;
        device(event::kCyclicDataGood, conn->responder, conn->initiator);
        connection(input ? event::kInputProcessDataSent : event::kOutputProcessDataSent, *conn);
        system_in_exchange(event::kCyclicDataGood, conn->responder);
    }

    void on(const OtherFrame&) {}

    const ParsedFrame& frame_;
    const DerivationContext& ctx_;
    const AssetInventory& inv_;
    const StateView& sv_;
    FrameProvenance cause_;
    Derivation out_;
};

}  // namespace

Derivation derive_events(const ParsedFrame& frame, const DerivationContext& ctx, const AssetInventory& inventory,
                         const StateView& states) {
    return Builder(frame, ctx, inventory, states).run();
}

void apply_derivation(DerivationContext& ctx, const Derivation& d, std::uint64_t frame_ordinal) {
    auto install = [&](const ConnectionInfo& info) {
        auto old = ctx.connections.find(info.key);
        if (old != ctx.connections.end()) {
            for (const auto& [k, r] : routes_for(old->second)) ctx.cyclic_routes.erase(k);
        }
        ctx.connections[info.key] = info;
        ctx.ar_index[info.ar_uuid] = info.key;
        for (const auto& [k, r] : routes_for(info)) {
            ctx.cyclic_routes[k] = r;
            ctx.reported_orphans.erase(k);
        }
    };
    if (d.open_connection) install(*d.open_connection);
    if (d.update_connection) install(*d.update_connection);
    if (d.release_deferred_name) {
        std::erase_if(ctx.deferred, [&](const DeferredEvent& e) { return e.event.deferred_name == d.release_deferred_name; });
    }
    for (const auto& e : d.defer) ctx.deferred.push_back({e, frame_ordinal});
    if (d.clear_pending_set) ctx.pending_sets.erase(*d.clear_pending_set);
    if (d.add_pending_set) ctx.pending_sets[d.add_pending_set->first] = d.add_pending_set->second;
    if (d.clear_pending_identify) ctx.pending_identify.erase(*d.clear_pending_identify);
    if (d.add_pending_identify) ctx.pending_identify[d.add_pending_identify->first] = d.add_pending_identify->second;
    if (d.orphan_reported) ctx.reported_orphans.insert(*d.orphan_reported);
}

std::vector<DeferredEvent> expire_deferred(DerivationContext& ctx, std::uint64_t frame_ordinal, std::uint64_t window) {
    std::vector<DeferredEvent> expired;
    std::erase_if(ctx.deferred, [&](const DeferredEvent& e) {
        if (frame_ordinal - e.frame_ordinal < window) return false;
        expired.push_back(e);
        return true;
    });
    return expired;
}

}  // namespace poet

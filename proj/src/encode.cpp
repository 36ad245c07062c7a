#include "poet/encode.hpp"

#include <algorithm>

#include "poet/bytes.hpp"

namespace poet {

namespace {

constexpr std::size_t kEthernetMinimum = 60;

void put_tlv(ByteWriter& w, std::uint8_t type, std::span<const std::uint8_t> value) {
    w.u16(static_cast<std::uint16_t>(type << 9 | (value.size() & 0x1FF)));
    w.bytes(value);
}

/// Writes a PNIO block header and body; `fill` appends the body.
template <class Fill>
void put_block(ByteWriter& w, std::uint16_t type, std::uint8_t vh, std::uint8_t vl, Fill&& fill) {
    w.u16(type);
    std::size_t len_at = w.size();
    w.u16(0);
    w.u8(vh);
    w.u8(vl);
    std::size_t body_at = w.size();
    fill();
    w.patch_u16(len_at, static_cast<std::uint16_t>(w.size() - body_at + 2));
}

std::uint16_t record_block_type(const CmFrame& f) {
    bool req = f.direction == CmDirection::Request;
    if (f.operation == CmOperation::Write) return req ? cm_block::kWriteReqHeader : cm_block::kWriteResHeader;
    return req ? cm_block::kReadReqHeader : cm_block::kReadResHeader;
}

void put_iocr(ByteWriter& w, const IocrDescriptor& cr) {
    put_block(w, cm_block::kIocrReq, 1, 0, [&] {
        w.u16(static_cast<std::uint16_t>(cr.type));
        w.u16(cr.reference);
        w.u16(cr.lt);
        w.u32(cr.properties);
        w.u16(cr.data_length);
        w.u16(cr.frame_id);
        w.u16(cr.send_clock_factor);
        w.u16(cr.reduction_ratio);
        w.u16(cr.phase);
        w.u16(0);
        w.u32(cr.frame_send_offset);
        w.u16(cr.watchdog_factor);
        w.u16(cr.data_hold_factor);
        w.u16(cr.tag_header);
        w.mac(cr.multicast_mac);
        std::vector<std::uint32_t> apis;
        for (const auto& o : cr.data_objects)
            if (std::find(apis.begin(), apis.end(), o.api) == apis.end()) apis.push_back(o.api);
        for (const auto& o : cr.iocs_entries)
            if (std::find(apis.begin(), apis.end(), o.api) == apis.end()) apis.push_back(o.api);
        w.u16(static_cast<std::uint16_t>(apis.size()));
        for (std::uint32_t api : apis) {
            w.u32(api);
            auto put_list = [&](const std::vector<IoDataObject>& list) {
                auto n = std::count_if(list.begin(), list.end(), [&](const IoDataObject& o) { return o.api == api; });
                w.u16(static_cast<std::uint16_t>(n));
                for (const auto& o : list) {
                    if (o.api != api) continue;
                    w.u16(o.slot);
                    w.u16(o.subslot);
                    w.u16(o.frame_offset);
                }
            };
            put_list(cr.data_objects);
            put_list(cr.iocs_entries);
        }
    });
}

void put_expected_submodules(ByteWriter& w, const std::vector<ExpectedSubmodule>& subs) {
    std::size_t i = 0;
    while (i < subs.size()) {
        std::size_t j = i + 1;
        auto same_module = [&](const ExpectedSubmodule& a, const ExpectedSubmodule& b) {
            return a.api == b.api && a.slot == b.slot && a.module_id == b.module_id &&
                   a.module_properties == b.module_properties;
        };
        while (j < subs.size() && same_module(subs[i], subs[j])) ++j;
        put_block(w, cm_block::kExpectedSubmoduleReq, 1, 0, [&] {
            w.u16(1);
            w.u32(subs[i].api);
            w.u16(subs[i].slot);
            w.u32(subs[i].module_id);
            w.u16(subs[i].module_properties);
            w.u16(static_cast<std::uint16_t>(j - i));
            for (std::size_t k = i; k < j; ++k) {
                w.u16(subs[k].subslot);
                w.u32(subs[k].submodule_id);
                w.u16(subs[k].submodule_properties);
                for (const auto& d : subs[k].data_descriptions) {
                    w.u16(static_cast<std::uint16_t>(d.direction));
                    w.u16(d.data_length);
                    w.u8(d.iocs_length);
                    w.u8(d.iops_length);
                }
            }
        });
        i = j;
    }
}

}  // namespace

std::uint16_t ipv4_header_checksum(std::span<const std::uint8_t> header) {
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i + 1 < header.size(); i += 2) sum += static_cast<std::uint32_t>(header[i] << 8 | header[i + 1]);
    while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
    return static_cast<std::uint16_t>(~sum);
}

std::vector<std::uint8_t> encode_lldp_payload(const LldpFrame& f) {
    ByteWriter w;
    std::vector<std::uint8_t> id;
    id.push_back(f.chassis_id.subtype);
    id.insert(id.end(), f.chassis_id.value.begin(), f.chassis_id.value.end());
    put_tlv(w, lldp::kChassisId, id);
    id.assign(1, f.port_id.subtype);
    id.insert(id.end(), f.port_id.value.begin(), f.port_id.value.end());
    put_tlv(w, lldp::kPortId, id);
    std::uint8_t ttl[2] = {static_cast<std::uint8_t>(f.ttl_seconds >> 8), static_cast<std::uint8_t>(f.ttl_seconds)};
    put_tlv(w, lldp::kTtl, ttl);
    for (const auto& d : f.port_descriptions)
        put_tlv(w, lldp::kPortDescription, std::span(reinterpret_cast<const std::uint8_t*>(d.data()), d.size()));
    if (f.station_name)
        put_tlv(w, lldp::kSystemName,
                std::span(reinterpret_cast<const std::uint8_t*>(f.station_name->data()), f.station_name->size()));
    if (f.management_address) {
        ByteWriter m;
        m.u8(5);
        m.u8(1);
        m.ipv4(*f.management_address);
        m.u8(2);
        m.u32(1);
        m.u8(0);
        put_tlv(w, lldp::kManagementAddress, m.buffer());
    }
    for (const auto& org : f.profinet_tlvs) {
        std::vector<std::uint8_t> v(org.oui.begin(), org.oui.end());
        v.push_back(org.subtype);
        v.insert(v.end(), org.data.begin(), org.data.end());
        put_tlv(w, lldp::kOrganizational, v);
    }
    for (const auto& t : f.other_tlvs) put_tlv(w, t.type, t.value);
    w.u16(0);
    return w.take();
}

std::vector<std::uint8_t> encode_arp_payload(const ArpPacket& p) {
    ByteWriter w;
    w.u16(1);
    w.u16(ethertype::kIpv4);
    w.u8(6);
    w.u8(4);
    w.u16(static_cast<std::uint16_t>(p.operation));
    w.mac(p.sender_mac);
    w.ipv4(p.sender_ip);
    w.mac(p.target_mac);
    w.ipv4(p.target_ip);
    return w.take();
}

std::vector<std::uint8_t> encode_dcp_payload(const DcpFrame& f) {
    ByteWriter w;
    w.u16(f.frame_id);
    w.u8(static_cast<std::uint8_t>(f.service_id));
    w.u8(static_cast<std::uint8_t>(f.service_type));
    w.u32(f.xid);
    w.u16(f.response_delay);
    std::size_t len_at = w.size();
    w.u16(0);
    bool pairs_only = f.service_id == DcpServiceId::Get && f.service_type == DcpServiceType::Request;
    for (const auto& b : f.blocks) {
        w.u8(b.option);
        w.u8(b.suboption);
        if (pairs_only) continue;
        std::size_t len = b.data.size() + (b.qualifier ? 2 : 0);
        w.u16(static_cast<std::uint16_t>(len));
        if (b.qualifier) w.u16(*b.qualifier);
        w.bytes(b.data);
        if (len & 1) w.u8(0);
    }
    w.patch_u16(len_at, static_cast<std::uint16_t>(w.size() - len_at - 2));
    return w.take();
}

std::vector<std::uint8_t> encode_cm_payload(const CmFrame& f) {
    // PNIO blocks first so NDR and RPC lengths are known.
    ByteWriter args;
    if (f.ar_request) {
        const auto& ar = *f.ar_request;
        put_block(args, cm_block::kArReq, 1, 0, [&] {
            args.u16(ar.ar_type);
            args.uuid(ar.ar_uuid);
            args.u16(ar.session_key);
            args.mac(ar.initiator_mac);
            args.uuid(ar.initiator_object_uuid);
            args.u32(ar.ar_properties);
            args.u16(ar.activity_timeout_factor);
            args.u16(ar.udp_rt_port);
            args.u16(static_cast<std::uint16_t>(ar.station_name.size()));
            args.text(ar.station_name);
        });
    }
    if (f.ar_response) {
        const auto& ar = *f.ar_response;
        put_block(args, cm_block::kArRes, 1, 0, [&] {
            args.u16(ar.ar_type);
            args.uuid(ar.ar_uuid);
            args.u16(ar.session_key);
            args.mac(ar.responder_mac);
            args.u16(ar.udp_rt_port);
        });
    }
    for (const auto& cr : f.iocr_blocks) put_iocr(args, cr);
    for (const auto& res : f.iocr_responses) {
        put_block(args, cm_block::kIocrRes, 1, 0, [&] {
            args.u16(static_cast<std::uint16_t>(res.type));
            args.u16(res.reference);
            args.u16(res.frame_id);
        });
    }
    for (const auto& raw : f.other_blocks)
        put_block(args, raw.type, raw.version_high, raw.version_low, [&] { args.bytes(raw.body); });
    put_expected_submodules(args, f.expected_submodules);
    if (f.record) {
        const auto& h = *f.record;
        std::uint16_t type = record_block_type(f);
        put_block(args, type, 1, 0, [&] {
            args.u16(h.seq_number);
            args.uuid(h.ar_uuid);
            args.u32(h.api);
            args.u16(h.slot);
            args.u16(h.subslot);
            args.u16(0);
            args.u16(h.index);
            args.u32(h.record_length);
            if (type == cm_block::kWriteResHeader) {
                args.u16(0);
                args.u16(0);
                args.bytes(f.pnio_status);
                args.zeros(16);
            } else if (type == cm_block::kReadResHeader) {
                args.u16(0);
                args.u16(0);
                args.zeros(20);
            } else {
                args.zeros(24);
            }
        });
        if (type == cm_block::kWriteReqHeader || type == cm_block::kReadResHeader) args.bytes(f.record_data);
    }
    if (f.control) {
        const auto& c = *f.control;
        put_block(args, c.block_type, 1, 0, [&] {
            args.u16(0);
            args.uuid(c.ar_uuid);
            args.u16(c.session_key);
            args.u16(0);
            args.u16(c.command);
            args.u16(c.properties);
        });
    }

    const RpcHeader& h = f.rpc;
    bool le = h.little_endian();
    ByteWriter body;
    auto args_len = static_cast<std::uint32_t>(args.size());
    if (f.direction == CmDirection::Request) {
        body.u32(f.args_maximum, le);
        body.u32(args_len, le);
        body.u32(f.args_maximum, le);
    } else {
        body.bytes(f.pnio_status);
        body.u32(args_len, le);
        body.u32(args_len, le);
    }
    body.u32(0, le);
    body.u32(args_len, le);
    body.bytes(args.buffer());

    ByteWriter w;
    // IPv4
    std::size_t ip_at = w.size();
    w.u8(0x45);
    w.u8(0);
    std::size_t total_at = w.size();
    w.u16(0);
    w.u16(f.udp.ip_id);
    w.u16(0x4000);
    w.u8(f.udp.ttl);
    w.u8(17);
    std::size_t csum_at = w.size();
    w.u16(0);
    w.ipv4(f.udp.src_ip);
    w.ipv4(f.udp.dst_ip);
    // UDP
    std::size_t udp_at = w.size();
    w.u16(f.udp.src_port);
    w.u16(f.udp.dst_port);
    std::size_t udp_len_at = w.size();
    w.u16(0);
    w.u16(0);
    // DCE/RPC connectionless header
    w.u8(4);
    w.u8(h.packet_type);
    w.u8(h.flags1);
    w.u8(h.flags2);
    w.bytes(h.drep);
    w.u8(0);
    w.uuid(h.object_uuid, le);
    w.uuid(h.interface_uuid, le);
    w.uuid(h.activity_uuid, le);
    w.u32(h.server_boot, le);
    w.u32(h.interface_version, le);
    w.u32(h.sequence_number, le);
    w.u16(h.opnum, le);
    w.u16(h.interface_hint, le);
    w.u16(h.activity_hint, le);
    w.u16(static_cast<std::uint16_t>(body.size()), le);
    w.u16(0, le);
    w.u8(0);
    w.u8(0);
    w.bytes(body.buffer());

    w.patch_u16(total_at, static_cast<std::uint16_t>(w.size() - ip_at));
    w.patch_u16(udp_len_at, static_cast<std::uint16_t>(w.size() - udp_at));
    w.patch_u16(csum_at, ipv4_header_checksum(std::span(w.buffer()).subspan(ip_at, 20)));
    return w.take();
}

std::vector<std::uint8_t> encode_pnio_payload(const PnioCyclicFrame& f) {
    ByteWriter w;
    w.u16(f.frame_id);
    w.bytes(f.data);
    w.u16(f.cycle_counter);
    w.u8(f.data_status);
    w.u8(f.transfer_status);
    return w.take();
}

namespace {

std::vector<std::uint8_t> assemble(const LinkHeader& link, std::uint16_t type, std::span<const std::uint8_t> payload,
                                   bool pad) {
    ByteWriter w;
    w.mac(link.dst_mac);
    w.mac(link.src_mac);
    if (link.vlan_tag) {
        w.u16(ethertype::kVlan);
        w.u16(static_cast<std::uint16_t>(link.vlan_tag->pcp << 13 | (link.vlan_tag->dei ? 0x1000 : 0) |
                                         (link.vlan_tag->vid & 0x0FFF)));
    }
    w.u16(type);
    w.bytes(payload);
    if (pad && w.size() < kEthernetMinimum) w.zeros(kEthernetMinimum - w.size());
    return w.take();
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const LinkHeader& link, const FrameBody& body) {
    struct V {
        const LinkHeader& link;
        std::vector<std::uint8_t> operator()(const LldpFrame& f) const {
            return assemble(link, ethertype::kLldp, encode_lldp_payload(f), true);
        }
        std::vector<std::uint8_t> operator()(const ArpPacket& p) const {
            return assemble(link, ethertype::kArp, encode_arp_payload(p), true);
        }
        std::vector<std::uint8_t> operator()(const DcpFrame& f) const {
            return assemble(link, ethertype::kProfinet, encode_dcp_payload(f), true);
        }
        std::vector<std::uint8_t> operator()(const CmFrame& f) const {
            return assemble(link, ethertype::kIpv4, encode_cm_payload(f), true);
        }
        std::vector<std::uint8_t> operator()(const PnioCyclicFrame& f) const {
            return assemble(link, ethertype::kProfinet, encode_pnio_payload(f), false);
        }
        std::vector<std::uint8_t> operator()(const OtherFrame& f) const {
            return assemble(link, f.ethertype, {}, true);
        }
    };
    return std::visit(V{link}, body);
}

std::vector<std::uint8_t> encode_frame(const ParsedFrame& frame) {
    LinkHeader link{frame.envelope.dst_mac, frame.envelope.src_mac, frame.envelope.vlan_tag};
    if (const auto* other = frame.as<OtherFrame>())
        return assemble(link, other->ethertype, frame.envelope.payload, true);
    return encode_frame(link, frame.body);
}

}  // namespace poet

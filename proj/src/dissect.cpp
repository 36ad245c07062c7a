#include "poet/dissect.hpp"

#include <cstdio>

#include "poet/bytes.hpp"

namespace poet {

namespace {

std::string hex16(std::uint16_t v) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%04x", v);
    return buf;
}

/// Raised to reclassify a frame as Other mid-parse (e.g. non-PNIO RPC).
struct PassThrough {
    std::uint16_t ethertype;
    std::string tag;
};

// --------------------------------------------------------------------------- LLDP

LldpFrame parse_lldp(ByteReader r) {
    LldpFrame f;
    int index = 0;
    bool ended = false;
    while (!r.empty()) {
        std::size_t tlv_at = r.absolute();
        std::uint16_t header = r.u16();
        std::uint8_t type = static_cast<std::uint8_t>(header >> 9);
        std::uint16_t len = header & 0x1FF;
        ByteReader v = r.sub(len);
        auto fail_at = [&](const std::string& why) -> void { throw DecodeError(tlv_at, why); };
        if (index == 0 && type != lldp::kChassisId) fail_at("first TLV must be Chassis ID");
        if (index == 1 && type != lldp::kPortId) fail_at("second TLV must be Port ID");
        if (index == 2 && type != lldp::kTtl) fail_at("third TLV must be TTL");
        ++index;
        switch (type) {
            case lldp::kEnd:
                if (index <= 3) fail_at("End TLV before mandatory TLVs");
                ended = true;
                break;
            case lldp::kChassisId:
            case lldp::kPortId: {
                if (index > 2) {
                    f.other_tlvs.push_back({type, v.vec(len)});
                    break;
                }
                if (len < 2) fail_at("identifier TLV shorter than 2 bytes");
                LldpId id;
                id.subtype = v.u8();
                id.value = v.vec(v.remaining());
                (type == lldp::kChassisId ? f.chassis_id : f.port_id) = std::move(id);
                break;
            }
            case lldp::kTtl:
                if (index != 3) {
                    f.other_tlvs.push_back({type, v.vec(len)});
                    break;
                }
                if (len != 2) fail_at("TTL TLV length must be 2");
                f.ttl_seconds = v.u16();
                break;
            case lldp::kPortDescription: {
                auto s = v.bytes(len);
                f.port_descriptions.emplace_back(s.begin(), s.end());
                break;
            }
            case lldp::kSystemName:
                if (!f.station_name) {
                    auto s = v.bytes(len);
                    f.station_name = std::string(s.begin(), s.end());
                } else {
                    f.other_tlvs.push_back({type, v.vec(len)});
                }
                break;
            case lldp::kManagementAddress: {
                auto raw = v.rest();
                if (!f.management_address && len >= 6 && raw[0] == 5 && raw[1] == 1) {
                    v.skip(2);
                    f.management_address = v.ipv4();
                } else {
                    f.other_tlvs.push_back({type, v.vec(len)});
                }
                break;
            }
            case lldp::kOrganizational: {
                auto raw = v.rest();
                if (len >= 4 && raw[0] == lldp::kProfinetOui[0] && raw[1] == lldp::kProfinetOui[1] &&
                    raw[2] == lldp::kProfinetOui[2]) {
                    LldpOrgTlv org;
                    v.skip(3);
                    org.oui = lldp::kProfinetOui;
                    org.subtype = v.u8();
                    org.data = v.vec(v.remaining());
                    f.profinet_tlvs.push_back(std::move(org));
                } else {
                    f.other_tlvs.push_back({type, v.vec(len)});
                }
                break;
            }
            default:
                f.other_tlvs.push_back({type, v.vec(len)});
                break;
        }
        if (ended) break;
    }
    if (index < 3) r.fail("LLDPDU ends before mandatory TLVs");
    if (!ended) r.fail("LLDPDU missing End TLV");
    return f;
}

// --------------------------------------------------------------------------- ARP

FrameBody parse_arp(ByteReader r) {
    std::uint16_t htype = r.u16();
    std::uint16_t ptype = r.u16();
    std::uint8_t hlen = r.u8();
    std::uint8_t plen = r.u8();
    std::uint16_t op = r.u16();
    if (htype != 1 || ptype != ethertype::kIpv4 || hlen != 6 || plen != 4)
        return OtherFrame{ethertype::kArp, "arp-non-ipv4"};
    ArpPacket p;
    p.sender_mac = r.mac();
    p.sender_ip = r.ipv4();
    p.target_mac = r.mac();
    p.target_ip = r.ipv4();
    if (op != 1 && op != 2) return OtherFrame{ethertype::kArp, "arp-op-" + std::to_string(op)};
    p.operation = static_cast<ArpOperation>(op);
    return p;
}

// --------------------------------------------------------------------------- PN-DCP

enum class BlockPrefix { None, Qualifier, PairsOnly };

BlockPrefix block_prefix(const DcpFrame& f) {
    if (f.service_type == DcpServiceType::Request) {
        switch (f.service_id) {
            case DcpServiceId::Set:
            case DcpServiceId::Hello: return BlockPrefix::Qualifier;
            case DcpServiceId::Get: return BlockPrefix::PairsOnly;
            case DcpServiceId::Identify: return BlockPrefix::None;
        }
    }
    return BlockPrefix::Qualifier;
}

DcpFrame parse_dcp(ByteReader r) {
    DcpFrame f;
    f.frame_id = r.u16();
    std::uint8_t sid = r.u8();
    if (sid < 3 || sid > 6) r.fail("unknown DCP service id " + std::to_string(sid));
    f.service_id = static_cast<DcpServiceId>(sid);
    f.service_type = static_cast<DcpServiceType>(r.u8());
    f.xid = r.u32();
    f.response_delay = r.u16();
    std::uint16_t data_len = r.u16();
    if (data_len > r.remaining())
        r.fail("DCPDataLength " + std::to_string(data_len) + " exceeds payload " + std::to_string(r.remaining()));
    ByteReader blocks = r.sub(data_len);
    BlockPrefix prefix = block_prefix(f);
    while (!blocks.empty()) {
        DcpBlock b;
        b.option = blocks.u8();
        b.suboption = blocks.u8();
        if (prefix == BlockPrefix::PairsOnly) {
            f.blocks.push_back(std::move(b));
            continue;
        }
        std::uint16_t len = blocks.u16();
        ByteReader v = blocks.sub(len);
        bool control_response = b.option == dcp::kOptionControl && b.suboption == dcp::kSubControlResponse;
        if (prefix == BlockPrefix::Qualifier && !control_response) {
            if (len < 2) v.fail("DCP block shorter than its qualifier");
            b.qualifier = v.u16();
        }
        b.data = v.vec(v.remaining());
        if ((len & 1) && !blocks.empty()) blocks.skip(1);
        f.blocks.push_back(std::move(b));
    }
    return f;
}

// --------------------------------------------------------------------------- PN-CM

ArBlockRequest parse_ar_request(ByteReader& b) {
    ArBlockRequest ar;
    ar.ar_type = b.u16();
    ar.ar_uuid = b.uuid();
    ar.session_key = b.u16();
    ar.initiator_mac = b.mac();
    ar.initiator_object_uuid = b.uuid();
    ar.ar_properties = b.u32();
    ar.activity_timeout_factor = b.u16();
    ar.udp_rt_port = b.u16();
    std::uint16_t name_len = b.u16();
    auto name = b.bytes(name_len);
    ar.station_name.assign(name.begin(), name.end());
    return ar;
}

ArBlockResponse parse_ar_response(ByteReader& b) {
    ArBlockResponse ar;
    ar.ar_type = b.u16();
    ar.ar_uuid = b.uuid();
    ar.session_key = b.u16();
    ar.responder_mac = b.mac();
    ar.udp_rt_port = b.u16();
    return ar;
}

IocrDescriptor parse_iocr(ByteReader& b) {
    IocrDescriptor cr;
    std::uint16_t type = b.u16();
    if (type != 1 && type != 2) b.fail("unsupported IOCR type " + std::to_string(type));
    cr.type = static_cast<IoCrType>(type);
    cr.reference = b.u16();
    cr.lt = b.u16();
    cr.properties = b.u32();
    cr.data_length = b.u16();
    cr.frame_id = b.u16();
    cr.send_clock_factor = b.u16();
    cr.reduction_ratio = b.u16();
    cr.phase = b.u16();
    b.skip(2);  // Sequence
    cr.frame_send_offset = b.u32();
    cr.watchdog_factor = b.u16();
    cr.data_hold_factor = b.u16();
    cr.tag_header = b.u16();
    cr.multicast_mac = b.mac();
    std::uint16_t apis = b.u16();
    for (std::uint16_t a = 0; a < apis; ++a) {
        std::uint32_t api = b.u32();
        std::uint16_t objects = b.u16();
        for (std::uint16_t i = 0; i < objects; ++i) {
            IoDataObject o{api, b.u16(), b.u16(), 0};
            o.frame_offset = b.u16();
            cr.data_objects.push_back(o);
        }
        std::uint16_t iocs = b.u16();
        for (std::uint16_t i = 0; i < iocs; ++i) {
            IoDataObject o{api, b.u16(), b.u16(), 0};
            o.frame_offset = b.u16();
            cr.iocs_entries.push_back(o);
        }
    }
    return cr;
}

void parse_expected_submodules(ByteReader& b, std::vector<ExpectedSubmodule>& out) {
    std::uint16_t apis = b.u16();
    for (std::uint16_t a = 0; a < apis; ++a) {
        ExpectedSubmodule proto;
        proto.api = b.u32();
        proto.slot = b.u16();
        proto.module_id = b.u32();
        proto.module_properties = b.u16();
        std::uint16_t subs = b.u16();
        for (std::uint16_t s = 0; s < subs; ++s) {
            ExpectedSubmodule sm = proto;
            sm.subslot = b.u16();
            sm.submodule_id = b.u32();
            sm.submodule_properties = b.u16();
            int descriptions = (sm.submodule_properties & 0x3) == 3 ? 2 : 1;
            for (int d = 0; d < descriptions; ++d) {
                DataDescription dd;
                std::uint16_t dir = b.u16();
                if (dir != 1 && dir != 2) b.fail("invalid DataDescription direction " + std::to_string(dir));
                dd.direction = static_cast<DataDirection>(dir);
                dd.data_length = b.u16();
                dd.iocs_length = b.u8();
                dd.iops_length = b.u8();
                sm.data_descriptions.push_back(dd);
            }
            out.push_back(std::move(sm));
        }
    }
}

RecordHeader parse_record_header(ByteReader& b) {
    RecordHeader h;
    h.seq_number = b.u16();
    h.ar_uuid = b.uuid();
    h.api = b.u32();
    h.slot = b.u16();
    h.subslot = b.u16();
    b.skip(2);
    h.index = b.u16();
    h.record_length = b.u32();
    return h;
}

ControlBlock parse_control(std::uint16_t type, ByteReader& b) {
    ControlBlock c;
    c.block_type = type;
    b.skip(2);
    c.ar_uuid = b.uuid();
    c.session_key = b.u16();
    b.skip(2);
    c.command = b.u16();
    c.properties = b.u16();
    return c;
}

CmFrame parse_cm(ByteReader rpc_reader, const UdpEnvelope& udp) {
    CmFrame f;
    f.udp = udp;
    ByteReader& r = rpc_reader;
    std::uint8_t version = r.u8();
    if (version != 4) r.fail("DCE/RPC version " + std::to_string(version) + " is not connectionless v4");
    RpcHeader& h = f.rpc;
    h.packet_type = r.u8();
    h.flags1 = r.u8();
    h.flags2 = r.u8();
    auto drep = r.bytes(3);
    std::copy(drep.begin(), drep.end(), h.drep.begin());
    bool le = h.little_endian();
    r.skip(1);  // serial_hi
    h.object_uuid = r.uuid(le);
    h.interface_uuid = r.uuid(le);
    h.activity_uuid = r.uuid(le);
    h.server_boot = r.u32(le);
    h.interface_version = r.u32(le);
    h.sequence_number = r.u32(le);
    h.opnum = r.u16(le);
    h.interface_hint = r.u16(le);
    h.activity_hint = r.u16(le);
    std::size_t fraglen_at = r.absolute();
    std::uint16_t fragment_length = r.u16(le);
    std::uint16_t fragment_number = r.u16(le);
    r.skip(2);  // auth_proto, serial_lo
    if (h.packet_type != rpc::kRequest && h.packet_type != rpc::kResponse)
        throw PassThrough{ethertype::kIpv4, "rpc-ptype-" + std::to_string(h.packet_type)};
    if (!rpc::is_pnio_interface(h.interface_uuid)) throw PassThrough{ethertype::kIpv4, "rpc-non-pnio"};
    if ((h.flags1 & rpc::kFlagFragment) || fragment_number != 0)
        throw DecodeError(fraglen_at, "fragmented RPC PDUs are not supported");
    if (fragment_length > r.remaining())
        throw DecodeError(fraglen_at, "RPC fragment length " + std::to_string(fragment_length) + " exceeds datagram");
    ByteReader body = r.sub(fragment_length);

    f.direction = h.packet_type == rpc::kRequest ? CmDirection::Request : CmDirection::Response;
    if (f.direction == CmDirection::Request) {
        f.args_maximum = body.u32(le);
    } else {
        auto st = body.bytes(4);
        std::copy(st.begin(), st.end(), f.pnio_status.begin());
    }
    std::uint32_t args_length = body.u32(le);
    body.skip(4);  // MaximumCount
    body.skip(4);  // Offset
    std::uint32_t actual = body.u32(le);
    if (actual > body.remaining() || args_length > body.remaining())
        body.fail("NDR ActualCount exceeds RPC body");
    ByteReader args = body.sub(actual);

    switch (h.opnum) {
        case rpc::kOpConnect: f.operation = CmOperation::Connect; break;
        case rpc::kOpRelease: f.operation = CmOperation::Release; break;
        case rpc::kOpRead:
        case rpc::kOpReadImplicit: f.operation = CmOperation::Read; break;
        case rpc::kOpWrite: f.operation = CmOperation::Write; break;
        case rpc::kOpControl: f.operation = CmOperation::DControl; break;
        default: throw PassThrough{ethertype::kIpv4, "pn-cm-opnum-" + std::to_string(h.opnum)};
    }

    while (!args.empty()) {
        std::size_t block_at = args.absolute();
        std::uint16_t type = args.u16();
        std::uint16_t len = args.u16();
        if (len < 2) throw DecodeError(block_at, "PNIO block length below 2");
        ByteReader b = args.sub(len);
        std::uint8_t vh = b.u8();
        std::uint8_t vl = b.u8();
        switch (type) {
            case cm_block::kArReq: f.ar_request = parse_ar_request(b); break;
            case cm_block::kArRes: f.ar_response = parse_ar_response(b); break;
            case cm_block::kIocrReq: f.iocr_blocks.push_back(parse_iocr(b)); break;
            case cm_block::kIocrRes: {
                IocrResponse res;
                std::uint16_t t = b.u16();
                if (t != 1 && t != 2) b.fail("unsupported IOCR type " + std::to_string(t));
                res.type = static_cast<IoCrType>(t);
                res.reference = b.u16();
                res.frame_id = b.u16();
                f.iocr_responses.push_back(res);
                break;
            }
            case cm_block::kExpectedSubmoduleReq: parse_expected_submodules(b, f.expected_submodules); break;
            case cm_block::kWriteReqHeader:
            case cm_block::kReadResHeader:
            case cm_block::kReadReqHeader:
            case cm_block::kWriteResHeader: {
                f.record = parse_record_header(b);
                if (type == cm_block::kWriteReqHeader || type == cm_block::kReadResHeader) {
                    if (f.record->record_length > args.remaining())
                        throw DecodeError(block_at, "RecordDataLength exceeds PDU");
                    f.record_data = args.vec(f.record->record_length);
                }
                break;
            }
            case cm_block::kPrmEndReq:
            case cm_block::kPrmEndRes:
            case cm_block::kApplicationReadyReq:
            case cm_block::kApplicationReadyRes:
            case cm_block::kReleaseReq:
            case cm_block::kReleaseRes: f.control = parse_control(type, b); break;
            default: {
                CmRawBlock raw{type, vh, vl, b.vec(b.remaining())};
                f.other_blocks.push_back(std::move(raw));
                break;
            }
        }
    }

    if (h.opnum == rpc::kOpControl) {
        if (!f.control) throw PassThrough{ethertype::kIpv4, "pn-cm-control"};
        switch (f.control->block_type) {
            case cm_block::kPrmEndReq:
            case cm_block::kPrmEndRes: f.operation = CmOperation::DControl; break;
            case cm_block::kApplicationReadyReq:
            case cm_block::kApplicationReadyRes: f.operation = CmOperation::CControl; break;
            default: throw PassThrough{ethertype::kIpv4, "pn-cm-control"};
        }
    }

    if (f.ar_request) f.ar_uuid = f.ar_request->ar_uuid;
    else if (f.ar_response) f.ar_uuid = f.ar_response->ar_uuid;
    else if (f.record) f.ar_uuid = f.record->ar_uuid;
    else if (f.control) f.ar_uuid = f.control->ar_uuid;

    if (f.operation == CmOperation::Connect && f.direction == CmDirection::Request && !f.ar_request)
        throw DecodeError(args.absolute(), "Connect request without ARBlockReq");
    return f;
}

FrameBody parse_ipv4(ByteReader r, std::string& protocol) {
    std::size_t ip_at = r.absolute();
    std::uint8_t vihl = r.u8();
    if ((vihl >> 4) != 4) return OtherFrame{ethertype::kIpv4, "non-ipv4"};
    std::size_t ihl = (vihl & 0x0F) * 4u;
    if (ihl < 20) throw DecodeError(ip_at, "IPv4 header length below 20");
    r.skip(1);
    std::uint16_t total = r.u16();
    std::uint16_t id = r.u16();
    std::uint16_t frag = r.u16();
    std::uint8_t ttl = r.u8();
    std::uint8_t proto = r.u8();
    r.skip(2);
    Ipv4Address src = r.ipv4();
    Ipv4Address dst = r.ipv4();
    if (total < ihl || total - 20u > r.remaining()) throw DecodeError(ip_at + 2, "IPv4 total length exceeds frame");
    r.skip(ihl - 20);
    ByteReader ip_payload = r.sub(total - ihl);
    if ((frag & 0x2000) || (frag & 0x1FFF)) return OtherFrame{ethertype::kIpv4, "ipv4-fragment"};
    if (proto != 17) return OtherFrame{ethertype::kIpv4, ""};
    std::size_t udp_at = ip_payload.absolute();
    UdpEnvelope udp;
    udp.src_ip = src;
    udp.dst_ip = dst;
    udp.ip_id = id;
    udp.ttl = ttl;
    udp.src_port = ip_payload.u16();
    udp.dst_port = ip_payload.u16();
    std::uint16_t udp_len = ip_payload.u16();
    ip_payload.skip(2);
    if (udp.src_port != kPnioCmUdpPort && udp.dst_port != kPnioCmUdpPort) return OtherFrame{ethertype::kIpv4, ""};
    if (udp_len < 8 || udp_len - 8u > ip_payload.remaining()) throw DecodeError(udp_at + 4, "UDP length exceeds IPv4 payload");
    protocol = "PN-CM";
    return parse_cm(ip_payload.sub(udp_len - 8u), udp);
}

// --------------------------------------------------------------------------- PNIO

PnioCyclicFrame parse_pnio(ByteReader r) {
    PnioCyclicFrame f;
    f.frame_id = r.u16();
    if (r.remaining() < 5) r.fail("cyclic frame needs at least 1 data byte and a 4-byte APDU status");
    f.data = r.vec(r.remaining() - 4);
    f.cycle_counter = r.u16();
    f.data_status = r.u8();
    f.transfer_status = r.u8();
    return f;
}

}  // namespace

// --------------------------------------------------------------------------- helpers

std::optional<MacAddress> LldpFrame::chassis_mac() const {
    for (const auto& t : profinet_tlvs) {
        if (t.subtype == lldp::kProfinetChassisMac && t.data.size() == 6) {
            std::array<std::uint8_t, 6> a{};
            std::copy(t.data.begin(), t.data.end(), a.begin());
            return MacAddress{a};
        }
    }
    if (chassis_id.subtype == lldp::kSubtypeMacAddress && chassis_id.value.size() == 6) {
        std::array<std::uint8_t, 6> a{};
        std::copy(chassis_id.value.begin(), chassis_id.value.end(), a.begin());
        return MacAddress{a};
    }
    return std::nullopt;
}

std::vector<std::string> LldpFrame::violations() const {
    std::vector<std::string> out;
    if (ttl_seconds == 0) out.emplace_back("TTL is 0 (shutdown LLDPDU)");
    if (chassis_id.value.empty()) out.emplace_back("empty chassis id");
    if (port_id.value.empty()) out.emplace_back("empty port id");
    return out;
}

LldpOrgTlv make_profinet_chassis_mac_tlv(const MacAddress& mac) {
    return {lldp::kProfinetOui, lldp::kProfinetChassisMac, {mac.bytes().begin(), mac.bytes().end()}};
}

const DcpBlock* DcpFrame::find(std::uint8_t option, std::uint8_t suboption) const {
    for (const auto& b : blocks)
        if (b.option == option && b.suboption == suboption) return &b;
    return nullptr;
}

std::optional<std::string> DcpFrame::name_of_station() const {
    const DcpBlock* b = find(dcp::kOptionDeviceProperties, dcp::kSubNameOfStation);
    if (!b) return std::nullopt;
    return std::string(b->data.begin(), b->data.end());
}

std::optional<DcpIpParameter> DcpFrame::ip_parameter() const {
    const DcpBlock* b = find(dcp::kOptionIp, dcp::kSubIpParameter);
    if (!b) b = find(dcp::kOptionIp, dcp::kSubIpFullSuite);
    if (!b || b->data.size() < 12) return std::nullopt;
    ByteReader r(b->data);
    DcpIpParameter p;
    p.ip = r.ipv4();
    p.subnet = r.ipv4();
    p.gateway = r.ipv4();
    return p;
}

std::optional<DcpDeviceIdentity> DcpFrame::device_identity() const {
    const DcpBlock* b = find(dcp::kOptionDeviceProperties, dcp::kSubDeviceId);
    if (!b || b->data.size() < 4) return std::nullopt;
    ByteReader r(b->data);
    DcpDeviceIdentity id;
    id.vendor_id = r.u16();
    id.device_id = r.u16();
    return id;
}

std::vector<std::string> DcpFrame::violations() const {
    auto name = name_of_station();
    if (!name) return {};
    return station_name_violations(*name);
}

std::vector<std::string> station_name_violations(std::string_view name) {
    std::vector<std::string> out;
    if (name.empty()) {
        out.emplace_back("NameOfStation is empty");
        return out;
    }
    if (name.size() > 240) out.emplace_back("NameOfStation longer than 240 characters");
    bool bad_char = false;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.';
        if (!ok) bad_char = true;
    }
    if (bad_char) out.emplace_back("NameOfStation contains characters outside [a-z0-9-.]");
    std::size_t start = 0;
    int labels = 0;
    bool all_numeric_labels = true;
    while (start <= name.size()) {
        std::size_t dot = name.find('.', start);
        std::string_view label = name.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
        ++labels;
        if (label.empty() || label.size() > 63) {
            out.emplace_back("NameOfStation label length must be 1..63");
        } else if (label.front() == '-' || label.back() == '-') {
            out.emplace_back("NameOfStation label starts or ends with '-'");
        }
        for (char c : label)
            if (c < '0' || c > '9') all_numeric_labels = false;
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    if (labels == 4 && all_numeric_labels) out.emplace_back("NameOfStation has the form of an IPv4 address");
    if (name.size() >= 8 && name.substr(0, 5) == "port-" && name[5] >= '0' && name[5] <= '9' &&
        name[6] >= '0' && name[6] <= '9' && name[7] >= '0' && name[7] <= '9' &&
        (name.size() == 8 || name[8] == '-'))
        out.emplace_back("NameOfStation starts with a reserved port-xyz label");
    return out;
}

DcpBlock make_dcp_name_block(std::string_view name, std::optional<std::uint16_t> qualifier) {
    return {dcp::kOptionDeviceProperties, dcp::kSubNameOfStation, qualifier, {name.begin(), name.end()}};
}

DcpBlock make_dcp_ip_block(const DcpIpParameter& ip, std::optional<std::uint16_t> qualifier) {
    ByteWriter w;
    w.ipv4(ip.ip);
    w.ipv4(ip.subnet);
    w.ipv4(ip.gateway);
    return {dcp::kOptionIp, dcp::kSubIpParameter, qualifier, w.take()};
}

std::string_view to_string(CmOperation op) {
    switch (op) {
        case CmOperation::Connect: return "Connect";
        case CmOperation::Release: return "Release";
        case CmOperation::Read: return "Read";
        case CmOperation::Write: return "Write";
        case CmOperation::DControl: return "DControl";
        case CmOperation::CControl: return "CControl";
    }
    return "?";
}

namespace rpc {
namespace {
Uuid pnio_interface(std::uint8_t last_of_first) {
    return Uuid{{0xDE, 0xA0, 0x00, last_of_first, 0x6C, 0x97, 0x11, 0xD1, 0x82, 0x71, 0x00, 0xA0, 0x24, 0x42, 0xDF, 0x7D}};
}
}  // namespace
Uuid pnio_device_interface() { return pnio_interface(0x01); }
Uuid pnio_controller_interface() { return pnio_interface(0x02); }
bool is_pnio_interface(const Uuid& u) {
    std::uint8_t kind = u.bytes()[3];
    return kind >= 0x01 && kind <= 0x04 && u == pnio_interface(kind);
}
}  // namespace rpc

std::string_view protocol_name(const FrameBody& body) {
    struct V {
        std::string_view operator()(const LldpFrame&) const { return "LLDP"; }
        std::string_view operator()(const ArpPacket&) const { return "ARP"; }
        std::string_view operator()(const DcpFrame&) const { return "PN-DCP"; }
        std::string_view operator()(const CmFrame&) const { return "PN-CM"; }
        std::string_view operator()(const PnioCyclicFrame&) const { return "PNIO"; }
        std::string_view operator()(const OtherFrame&) const { return "Other"; }
    };
    return std::visit(V{}, body);
}

std::string summarize(const ParsedFrame& frame) {
    const auto& env = frame.envelope;
    struct V {
        const EthernetEnvelope& env;
        std::string operator()(const LldpFrame& f) const {
            std::string s = "LLDP from " + env.src_mac.to_string();
            if (f.station_name) s += " station=" + *f.station_name;
            s += " ttl=" + std::to_string(f.ttl_seconds);
            return s;
        }
        std::string operator()(const ArpPacket& p) const {
            std::string s = p.operation == ArpOperation::Request ? "ARP request " : "ARP reply ";
            s += p.sender_ip.to_string() + " -> " + p.target_ip.to_string();
            if (p.is_gratuitous()) s += " (gratuitous)";
            return s;
        }
        std::string operator()(const DcpFrame& f) const {
            static constexpr const char* kServices[] = {"?", "?", "?", "Get", "Set", "Identify", "Hello"};
            std::string s = std::string("DCP ") + kServices[static_cast<int>(f.service_id)];
            s += f.service_type == DcpServiceType::Request ? " request" : " response";
            char xid[16];
            std::snprintf(xid, sizeof xid, " xid=0x%08x", f.xid);
            s += xid;
            if (auto n = f.name_of_station()) s += " NameOfStation=" + *n;
            if (auto ip = f.ip_parameter()) s += " IP=" + ip->ip.to_string();
            return s;
        }
        std::string operator()(const CmFrame& f) const {
            std::string s = "CM " + std::string(to_string(f.operation));
            s += f.direction == CmDirection::Request ? " request" : " response";
            s += " ar=" + f.ar_uuid.to_string();
            return s;
        }
        std::string operator()(const PnioCyclicFrame& f) const {
            return "PNIO frame_id=" + hex16(f.frame_id) + " " + env.src_mac.to_string() + " -> " +
                   env.dst_mac.to_string() + " cycle=" + std::to_string(f.cycle_counter);
        }
        std::string operator()(const OtherFrame& f) const {
            std::string s = "Other ethertype=" + hex16(f.ethertype);
            if (!f.tag.empty()) s += " tag=" + f.tag;
            return s;
        }
    };
    return std::visit(V{env}, frame.body);
}

DissectResult dissect(const RawFrame& raw) { return dissect(raw.bytes, raw.capture_index); }

DissectResult dissect(std::span<const std::uint8_t> bytes, std::uint64_t capture_index) {
    if (bytes.size() < kMinFrameBytes)
        return MalformedFrame{"Ethernet", 0, "frame shorter than 14-byte Ethernet header", capture_index, std::nullopt};
    ByteReader r(bytes);
    EthernetEnvelope env;
    env.dst_mac = r.mac();
    env.src_mac = r.mac();
    env.ethertype = r.u16();
    if (env.ethertype == ethertype::kVlan) {
        if (r.remaining() < 4)
            return MalformedFrame{"Ethernet", r.absolute(), "truncated 802.1Q tag", capture_index, std::nullopt};
        std::uint16_t tci = r.u16();
        env.vlan_tag = VlanTag{static_cast<std::uint8_t>(tci >> 13), (tci & 0x1000) != 0,
                               static_cast<std::uint16_t>(tci & 0x0FFF)};
        env.ethertype = r.u16();
    }
    std::size_t header = r.position();
    env.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
    ByteReader payload(bytes.subspan(header), header);

    std::string protocol = "Other";
    try {
        FrameBody body = OtherFrame{env.ethertype, ""};
        switch (env.ethertype) {
            case ethertype::kLldp:
                protocol = "LLDP";
                body = parse_lldp(payload);
                break;
            case ethertype::kArp:
                protocol = "ARP";
                body = parse_arp(payload);
                break;
            case ethertype::kProfinet: {
                protocol = "PROFINET";
                if (payload.remaining() < 2) payload.fail("PROFINET frame without FrameID");
                std::uint16_t id = static_cast<std::uint16_t>(bytes[header] << 8 | bytes[header + 1]);
                if (frame_id::is_dcp(id)) {
                    protocol = "PN-DCP";
                    body = parse_dcp(payload);
                } else if (frame_id::is_cyclic(id)) {
                    protocol = "PNIO";
                    body = parse_pnio(payload);
                } else if (id == frame_id::kAlarmHigh || id == frame_id::kAlarmLow) {
                    body = OtherFrame{env.ethertype, "pn-alarm"};
                } else {
                    body = OtherFrame{env.ethertype, "pn-frame-id-" + hex16(id)};
                }
                break;
            }
            case ethertype::kIpv4:
                protocol = "IPv4";
                body = parse_ipv4(payload, protocol);
                break;
            default: break;
        }
        return ParsedFrame{std::move(env), std::move(body), capture_index};
    } catch (const PassThrough& p) {
        return ParsedFrame{std::move(env), OtherFrame{p.ethertype, p.tag}, capture_index};
    } catch (const DecodeError& e) {
        return MalformedFrame{protocol, e.offset(), e.what(), capture_index, std::move(env)};
    }
}

}  // namespace poet

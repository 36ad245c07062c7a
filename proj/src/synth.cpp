#include "poet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <set>

#include "poet/bytes.hpp"
#include "poet/derive.hpp"
#include "poet/io_layout.hpp"

namespace poet {

namespace {

namespace ds = system_state;

const MacAddress kLldpMulticast{{0x01, 0x80, 0xC2, 0x00, 0x00, 0x0E}};
const MacAddress kDcpIdentifyMulticast{{0x01, 0x0E, 0xCF, 0x00, 0x00, 0x00}};
const MacAddress kBroadcast{{0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF}};
const std::set<std::string> kMalformedProtocols{"LLDP", "ARP", "PN-DCP", "PN-CM", "PNIO"};

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::string_view to_string(InjectionKind k) {
    switch (k) {
        case InjectionKind::Rename: return "rename";
        case InjectionKind::RogueConnect: return "rogue_connect";
        case InjectionKind::Malformed: return "malformed";
        case InjectionKind::OrphanWrite: return "orphan_write";
    }
    return "rename";
}

std::string_view to_string(InjectionPosition p) {
    switch (p) {
        case InjectionPosition::AfterFrame: return "after_frame";
        case InjectionPosition::AfterCycle: return "after_cycle";
        case InjectionPosition::BeforeConnect: return "before_connect";
    }
    return "after_frame";
}

template <class T>
T parse_or_throw(const Json& j, const char* what) {
    auto text = j.get<std::string>();
    std::optional<T> v = T::parse(text);
    if (!v) throw InvalidScenario(std::string("bad ") + what + " '" + text + "'");
    return *v;
}

DataDirection parse_direction(const std::string& s) {
    if (s == "input") return DataDirection::Input;
    if (s == "output") return DataDirection::Output;
    throw InvalidScenario("bad submodule direction '" + s + "'");
}

std::string direction_name(DataDirection d) { return d == DataDirection::Input ? "input" : "output"; }

Uuid pnio_object_uuid(std::uint16_t vendor, std::uint16_t device) {
    return Uuid({0xDE, 0xA0, 0x00, 0x00, 0x6C, 0x97, 0x11, 0xD1, 0x82, 0x71, 0x00, 0x01,
                 static_cast<std::uint8_t>(device >> 8), static_cast<std::uint8_t>(device),
                 static_cast<std::uint8_t>(vendor >> 8), static_cast<std::uint8_t>(vendor)});
}

struct Station {
    MacAddress mac;
    std::string name;
    Ipv4Address ip;
    bool ip_assigned{false};
    std::uint32_t port_count{1};
    std::uint16_t vendor_id{0};
    std::uint16_t device_id{0};
};

struct CrPlan {
    IoCrType type{IoCrType::Input};
    std::uint16_t reference{1};
    std::uint16_t frame_id{0};
    std::uint16_t data_length{0};
    /// Submodules whose data travel in this CR, with their data offsets.
    std::vector<std::pair<SubmoduleSpec, std::uint16_t>> data;
    /// Submodules whose consumer status travels in this CR, with its offset.
    std::vector<std::pair<SubmoduleSpec, std::uint16_t>> iocs;
};

struct ConnectionPlan {
    std::size_t device{0};
    MacAddress initiator;
    Ipv4Address initiator_ip;
    Uuid ar_uuid;
    std::uint16_t session_key{1};
    std::uint16_t client_port{49152};
    CrPlan input;
    CrPlan output;
};

CrPlan plan_cr(IoCrType type, std::uint16_t reference, std::uint16_t frame_id, const std::vector<SubmoduleSpec>& subs) {
    CrPlan cr{type, reference, frame_id, 0, {}, {}};
    DataDirection own = type == IoCrType::Input ? DataDirection::Input : DataDirection::Output;
    std::uint16_t at = 0;
    for (const auto& s : subs) {
        if (s.direction != own) continue;
        cr.data.emplace_back(s, at);
        at = static_cast<std::uint16_t>(at + s.length + 1);
    }
    for (const auto& s : subs) {
        if (s.direction == own) continue;
        cr.iocs.emplace_back(s, at);
        at = static_cast<std::uint16_t>(at + 1);
    }
    cr.data_length = at;
    return cr;
}

IocrDescriptor describe(const CrPlan& cr) {
    IocrDescriptor d;
    d.type = cr.type;
    d.reference = cr.reference;
    d.data_length = cr.data_length;
    d.frame_id = cr.frame_id;
    for (const auto& [s, at] : cr.data) d.data_objects.push_back({0, s.slot, s.subslot, at});
    for (const auto& [s, at] : cr.iocs) d.iocs_entries.push_back({0, s.slot, s.subslot, at});
    return d;
}

class Generator {
public:
    explicit Generator(const ScenarioSpec& spec) : spec_(spec) {
        const auto& c = spec.controller;
        controller_ = {c.mac, c.name, c.ip, true, c.port_count, 0x002A, 0x0001};
        for (const auto& d : spec.devices) devices_.push_back({d.mac, d.name, d.ip, false, d.port_count, d.vendor_id, d.device_id});
        attacker_ = {spec.attacker_mac, "", spec.attacker_ip, true, 1, 0, 0};
        gap_ns_ = std::max<std::int64_t>(1000, std::llround(spec.timing.inter_frame_gap * 1e6) * 1000);
        cycle_ns_ = std::max<std::int64_t>(1000, std::llround(spec.timing.cycle_interval * 1e6) * 1000);
        clock_ = spec.timing.start.total_nanoseconds();
        clock_ -= clock_ % 1000;
        done_.assign(spec.injections.size(), false);
    }

    std::vector<SynthFrame> run() {
        lldp_round(true);
        for (std::size_t i = 0; i < devices_.size(); ++i) address_resolution(i);
        if (spec_.lldp_during_startup) lldp_round(false);

        inject_where(InjectionPosition::BeforeConnect, 0);
        for (std::size_t i = 0; i < devices_.size(); ++i) connect(i);
        for (auto& c : connections_) parametrize(c);
        if (spec_.lldp_during_startup) lldp_round(false);

        std::int64_t base = clock_ + gap_ns_;
        for (std::uint32_t r = 0; r < spec_.timing.cycles; ++r) {
            clock_ = std::max(clock_, base + static_cast<std::int64_t>(r) * cycle_ns_ - gap_ns_);
            for (const auto& c : connections_) {
                cyclic(c, c.output, r);
                cyclic(c, c.input, r);
            }
            inject_where(InjectionPosition::AfterCycle, r);
            if (spec_.lldp_refresh_every > 0 && (r + 1) % spec_.lldp_refresh_every == 0) lldp_round(false);
        }
        return std::move(frames_);
    }

private:
    // ---- emission plumbing

    SynthFrame& push(const LinkHeader& link, FrameBody body, std::string intent, std::string subject) {
        SynthFrame f;
        f.link = link;
        f.raw.bytes = encode_frame(link, body);
        f.body = std::move(body);
        f.intent = std::move(intent);
        f.subject = std::move(subject);
        return finish(std::move(f));
    }

    SynthFrame& push_raw(std::vector<std::uint8_t> bytes, const LinkHeader& link, std::string intent, std::string subject) {
        SynthFrame f;
        f.link = link;
        f.raw.bytes = std::move(bytes);
        f.intent = std::move(intent);
        f.subject = std::move(subject);
        return finish(std::move(f));
    }

    SynthFrame& finish(SynthFrame f) {
        clock_ += gap_ns_;
        f.raw.timestamp = Timestamp::from_nanoseconds(clock_);
        f.raw.capture_index = frames_.size();
        f.raw.source_id = spec_.name;
        frames_.push_back(std::move(f));
        std::size_t index = frames_.size() - 1;
        pending_after_frame_.push_back(index);
        return frames_.back();
    }

    /// After-frame injections run once the frame that triggered them is fully annotated.
    void flush_after_frame() {
        while (!pending_after_frame_.empty() && !injecting_) {
            std::size_t index = pending_after_frame_.front();
            pending_after_frame_.erase(pending_after_frame_.begin());
            inject_where(InjectionPosition::AfterFrame, index);
        }
    }

    void inject_where(InjectionPosition pos, std::uint64_t index) {
        if (injecting_) return;
        for (std::size_t k = 0; k < spec_.injections.size(); ++k) {
            const auto& inj = spec_.injections[k];
            if (done_[k] || inj.position != pos) continue;
            if (pos != InjectionPosition::BeforeConnect && inj.index != index) continue;
            done_[k] = true;
            injecting_ = true;
            inject(inj, k);
            injecting_ = false;
        }
    }

    static std::string key(const MacAddress& m) { return m.to_string(); }

    void device_event(SynthFrame& f, const Station& s, const std::string& ev) {
        f.events.push_back({FsmKind::Device, key(s.mac), ev});
    }
    void connection_event(SynthFrame& f, const ConnectionPlan& c, const std::string& ev) {
        f.events.push_back({FsmKind::Connection, make_connection_key(c.initiator, devices_[c.device].mac), ev});
    }
    void system_event(SynthFrame& f, const std::string& ev) { f.events.push_back({FsmKind::System, "", ev}); }

    std::uint32_t next_xid() { return 0x00010000u + static_cast<std::uint32_t>(xid_++); }

    Station* by_name(const std::string& name) {
        for (auto& d : devices_)
            if (d.name == name) return &d;
        return nullptr;
    }
    std::size_t index_of(const Station* s) const { return static_cast<std::size_t>(s - devices_.data()); }

    // ---- LLDP

    LldpFrame lldp_body(const Station& s, std::uint32_t port) const {
        LldpFrame f;
        char port_name[16];
        std::snprintf(port_name, sizeof port_name, "port-%03u", port + 1);
        f.chassis_id = {lldp::kSubtypeLocal, {s.name.begin(), s.name.end()}};
        f.port_id = {lldp::kSubtypeLocal, {port_name, port_name + std::strlen(port_name)}};
        f.ttl_seconds = 20;
        f.station_name = s.name;
        f.port_descriptions = {std::string(port_name)};
        if (s.ip_assigned) f.management_address = s.ip;
        f.profinet_tlvs.push_back(make_profinet_chassis_mac_tlv(s.mac));
        return f;
    }

    void lldp_from(const Station& s) {
        for (std::uint32_t p = 0; p < s.port_count; ++p) {
            SynthFrame& f = push({kLldpMulticast, s.mac.offset(p + 1), std::nullopt}, lldp_body(s, p), "lldp", key(s.mac));
            f.sender_instance = key(s.mac);
            device_event(f, s, event::kDetectNeighbours);
            system_event(f, event::kPnTrafficDetected);
            flush_after_frame();
        }
    }

    void lldp_round(bool startup) {
        lldp_from(controller_);
        for (const auto& d : devices_) lldp_from(d);
        (void)startup;
    }

    // ---- address resolution

    DcpFrame dcp(std::uint16_t fid, DcpServiceId service, DcpServiceType type, std::uint32_t xid,
                 std::vector<DcpBlock> blocks, std::uint16_t delay = 0) const {
        DcpFrame f;
        f.frame_id = fid;
        f.service_id = service;
        f.service_type = type;
        f.xid = xid;
        f.response_delay = delay;
        f.blocks = std::move(blocks);
        return f;
    }

    std::vector<DcpBlock> identify_answer(const Station& s) const {
        Ipv4Address ip = s.ip_assigned ? s.ip : Ipv4Address{};
        Ipv4Address mask = s.ip_assigned ? Ipv4Address{0xFFFFFF00} : Ipv4Address{};
        ByteWriter id;
        id.u16(s.vendor_id);
        id.u16(s.device_id);
        return {make_dcp_name_block(s.name, 0), make_dcp_ip_block({ip, mask, {}}, s.ip_assigned ? 1 : 0),
                DcpBlock{dcp::kOptionDeviceProperties, dcp::kSubDeviceId, 0, id.take()}};
    }

    static DcpBlock set_ack(std::uint8_t option, std::uint8_t suboption) {
        return {dcp::kOptionControl, dcp::kSubControlResponse, std::nullopt, {option, suboption, 0}};
    }

    void address_resolution(std::size_t i) {
        Station& d = devices_[i];
        const Station& c = controller_;
        std::uint32_t xid = next_xid();

        SynthFrame* f = &push({kDcpIdentifyMulticast, c.mac, std::nullopt},
                              dcp(frame_id::kDcpIdentifyRequest, DcpServiceId::Identify, DcpServiceType::Request, xid,
                                  {make_dcp_name_block(d.name, std::nullopt)}, 1),
                              "dcp-identify-request", key(d.mac));
        f->sender_instance = key(c.mac);
        device_event(*f, d, event::kNameResolutionRequested);
        system_event(*f, event::kPnTrafficDetected);
        flush_after_frame();

        f = &push({c.mac, d.mac, std::nullopt},
                  dcp(frame_id::kDcpIdentifyResponse, DcpServiceId::Identify, DcpServiceType::ResponseSuccess, xid,
                      identify_answer(d)),
                  "dcp-identify-response", key(d.mac));
        f->sender_instance = key(d.mac);
        device_event(*f, d, event::kNameResolved);
        flush_after_frame();

        f = &push({kBroadcast, c.mac, std::nullopt}, ArpPacket{ArpOperation::Request, c.mac, {}, c.ip, d.ip},
                  "arp-probe", key(d.mac));
        flush_after_frame();

        xid = next_xid();
        f = &push({d.mac, c.mac, std::nullopt},
                  dcp(frame_id::kDcpGetSet, DcpServiceId::Set, DcpServiceType::Request, xid,
                      {make_dcp_ip_block({d.ip, Ipv4Address{0xFFFFFF00}, {}}, 1)}),
                  "dcp-set-ip-request", key(d.mac));
        f->sender_instance = key(c.mac);
        device_event(*f, d, event::kIpAssignmentRequested);
        flush_after_frame();

        d.ip_assigned = true;
        f = &push({c.mac, d.mac, std::nullopt},
                  dcp(frame_id::kDcpGetSet, DcpServiceId::Set, DcpServiceType::ResponseSuccess, xid,
                      {set_ack(dcp::kOptionIp, dcp::kSubIpParameter)}),
                  "dcp-set-ip-response", key(d.mac));
        f->sender_instance = key(d.mac);
        device_event(*f, d, event::kIpAssigned);
        flush_after_frame();

        f = &push({kBroadcast, d.mac, std::nullopt}, ArpPacket{ArpOperation::Request, d.mac, {}, d.ip, d.ip},
                  "arp-gratuitous", key(d.mac));
        device_event(*f, d, event::kDuplicationCheck);
        flush_after_frame();
    }

    // ---- PN-CM

    CmFrame cm(const Station& from, const Station& to, std::uint16_t from_port, std::uint16_t to_port,
               CmDirection dir, CmOperation op, std::uint16_t opnum, const Uuid& activity, std::uint32_t seq,
               const Uuid& iface, const Station& server) {
        CmFrame f;
        f.udp = {from.ip, to.ip, from_port, to_port, static_cast<std::uint16_t>(ip_id_++), 64};
        f.rpc.packet_type = dir == CmDirection::Request ? rpc::kRequest : rpc::kResponse;
        f.rpc.flags1 = dir == CmDirection::Request ? rpc::kFlagIdempotent : rpc::kFlagNoFack;
        f.rpc.object_uuid = pnio_object_uuid(server.vendor_id, server.device_id);
        f.rpc.interface_uuid = iface;
        f.rpc.activity_uuid = activity;
        f.rpc.server_boot = 1;
        f.rpc.sequence_number = seq;
        f.rpc.opnum = opnum;
        f.direction = dir;
        f.operation = op;
        if (dir == CmDirection::Request) f.args_maximum = 16696;
        return f;
    }

    Uuid next_activity() { return Uuid::from_seed(spec_.seed, 0x10000 + activity_++); }

    std::vector<ExpectedSubmodule> expected(const DeviceSpec& d) const {
        std::vector<ExpectedSubmodule> out;
        for (const auto& s : d.submodules) {
            ExpectedSubmodule e;
            e.slot = s.slot;
            e.module_id = 0x100u + s.slot;
            e.subslot = s.subslot;
            e.submodule_id = 1;
            e.submodule_properties = s.direction == DataDirection::Input ? 1 : 2;
            e.data_descriptions.push_back({s.direction, s.length, 1, 1});
            out.push_back(std::move(e));
        }
        return out;
    }

    static CmRawBlock alarm_cr_request() {
        ByteWriter w;
        w.u16(1);
        w.u16(ethertype::kProfinet);
        w.u32(0);
        w.u16(100);
        w.u16(3);
        w.u16(1);
        w.u16(200);
        w.u16(0xC000);
        w.u16(0xA000);
        return {cm_block::kAlarmCrReq, 1, 0, w.take()};
    }

    static CmRawBlock alarm_cr_response() {
        ByteWriter w;
        w.u16(1);
        w.u16(1);
        w.u16(200);
        return {0x8103, 1, 0, w.take()};
    }

    ConnectionPlan plan(std::size_t device, const MacAddress& initiator, const Ipv4Address& ip, const Uuid& ar,
                        std::uint16_t session, std::uint16_t fid_base, std::uint16_t port) const {
        ConnectionPlan c;
        c.device = device;
        c.initiator = initiator;
        c.initiator_ip = ip;
        c.ar_uuid = ar;
        c.session_key = session;
        c.client_port = port;
        const auto& subs = spec_.devices[device].submodules;
        c.input = plan_cr(IoCrType::Input, 1, fid_base, subs);
        c.output = plan_cr(IoCrType::Output, 2, static_cast<std::uint16_t>(fid_base + 1), subs);
        return c;
    }

    CmFrame connect_request(const ConnectionPlan& c, const Station& initiator, const Uuid& activity, std::uint32_t seq) {
        const Station& d = devices_[c.device];
        CmFrame f = cm(initiator, d, c.client_port, kPnioCmUdpPort, CmDirection::Request, CmOperation::Connect,
                       rpc::kOpConnect, activity, seq, rpc::pnio_device_interface(), d);
        ArBlockRequest ar;
        ar.ar_uuid = c.ar_uuid;
        ar.session_key = c.session_key;
        ar.initiator_mac = initiator.mac;
        ar.initiator_object_uuid = Uuid::from_seed(spec_.seed, 0x500 + c.session_key);
        ar.ar_properties = 0x00000011;
        ar.station_name = initiator.name.empty() ? "unknown" : initiator.name;
        f.ar_request = ar;
        f.ar_uuid = c.ar_uuid;
        f.iocr_blocks = {describe(c.input), describe(c.output)};
        f.other_blocks = {alarm_cr_request()};
        f.expected_submodules = expected(spec_.devices[c.device]);
        return f;
    }

    void connect(std::size_t i) {
        const Station& d = devices_[i];
        ConnectionPlan c = plan(i, controller_.mac, controller_.ip, Uuid::from_seed(spec_.seed, 0x1000 + i),
                                static_cast<std::uint16_t>(i + 1), static_cast<std::uint16_t>(frame_id::kCyclicFirst + 2 * i),
                                static_cast<std::uint16_t>(49152 + i));
        Uuid activity = next_activity();
        std::uint32_t seq = seq_++;

        SynthFrame* f = &push({d.mac, controller_.mac, std::nullopt}, connect_request(c, controller_, activity, seq),
                              "cm-connect-request", key(d.mac));
        f->sender_instance = key(controller_.mac);
        f->opens_connection = OpenedConnection{make_connection_key(c.initiator, d.mac), key(c.initiator), key(d.mac)};
        device_event(*f, d, event::kConnectRequested);
        system_event(*f, event::kConnectRequested);
        flush_after_frame();

        CmFrame res = cm(d, controller_, kPnioCmUdpPort, c.client_port, CmDirection::Response, CmOperation::Connect,
                         rpc::kOpConnect, activity, seq, rpc::pnio_device_interface(), d);
        res.ar_response = ArBlockResponse{1, c.ar_uuid, c.session_key, d.mac, ethertype::kProfinet};
        res.ar_uuid = c.ar_uuid;
        res.iocr_responses = {{IoCrType::Input, 1, c.input.frame_id}, {IoCrType::Output, 2, c.output.frame_id}};
        res.other_blocks = {alarm_cr_response()};
        f = &push({controller_.mac, d.mac, std::nullopt}, res, "cm-connect-response", key(d.mac));
        f->sender_instance = key(d.mac);
        flush_after_frame();

        connections_.push_back(std::move(c));
    }

    std::vector<std::uint8_t> record_bytes(std::size_t n, std::uint64_t salt) const {
        std::vector<std::uint8_t> out(n);
        for (std::size_t k = 0; k < n; ++k) out[k] = static_cast<std::uint8_t>(splitmix(spec_.seed ^ (salt << 16) ^ k));
        return out;
    }

    CmFrame write_request(const ConnectionPlan& c, const Uuid& ar, const Uuid& activity, std::uint32_t seq,
                          std::uint16_t record_seq) {
        const Station& d = devices_[c.device];
        const SubmoduleSpec& first = spec_.devices[c.device].submodules.front();
        CmFrame f = cm(controller_, d, c.client_port, kPnioCmUdpPort, CmDirection::Request, CmOperation::Write,
                       rpc::kOpWrite, activity, seq, rpc::pnio_device_interface(), d);
        f.record_data = record_bytes(4, 0x700 + c.device);
        f.record = RecordHeader{record_seq, ar, 0, first.slot, first.subslot, 0x0100,
                                static_cast<std::uint32_t>(f.record_data.size())};
        f.ar_uuid = ar;
        return f;
    }

    void parametrize(const ConnectionPlan& c) {
        const Station& d = devices_[c.device];
        const Station& ctl = controller_;

        Uuid activity = next_activity();
        std::uint32_t seq = seq_++;
        SynthFrame* f = &push({d.mac, ctl.mac, std::nullopt}, write_request(c, c.ar_uuid, activity, seq, 0),
                              "cm-write-request", key(d.mac));
        f->sender_instance = key(ctl.mac);
        device_event(*f, d, event::kParametrizationWrite);
        connection_event(*f, c, event::kParametrizationWrite);
        flush_after_frame();

        CmFrame wres = cm(d, ctl, kPnioCmUdpPort, c.client_port, CmDirection::Response, CmOperation::Write,
                          rpc::kOpWrite, activity, seq, rpc::pnio_device_interface(), d);
        const SubmoduleSpec& first = spec_.devices[c.device].submodules.front();
        wres.record = RecordHeader{0, c.ar_uuid, 0, first.slot, first.subslot, 0x0100, 4};
        wres.ar_uuid = c.ar_uuid;
        f = &push({ctl.mac, d.mac, std::nullopt}, wres, "cm-write-response", key(d.mac));
        f->sender_instance = key(d.mac);
        flush_after_frame();

        activity = next_activity();
        seq = seq_++;
        CmFrame prm = cm(ctl, d, c.client_port, kPnioCmUdpPort, CmDirection::Request, CmOperation::DControl,
                         rpc::kOpControl, activity, seq, rpc::pnio_device_interface(), d);
        prm.control = ControlBlock{cm_block::kPrmEndReq, c.ar_uuid, c.session_key, 0x0001, 0};
        prm.ar_uuid = c.ar_uuid;
        f = &push({d.mac, ctl.mac, std::nullopt}, prm, "cm-prm-end-request", key(d.mac));
        f->sender_instance = key(ctl.mac);
        device_event(*f, d, event::kEndOfParametrization);
        connection_event(*f, c, event::kEndOfParametrization);
        flush_after_frame();

        CmFrame prm_res = cm(d, ctl, kPnioCmUdpPort, c.client_port, CmDirection::Response, CmOperation::DControl,
                             rpc::kOpControl, activity, seq, rpc::pnio_device_interface(), d);
        prm_res.control = ControlBlock{cm_block::kPrmEndRes, c.ar_uuid, c.session_key, 0x0008, 0};
        prm_res.ar_uuid = c.ar_uuid;
        f = &push({ctl.mac, d.mac, std::nullopt}, prm_res, "cm-prm-end-response", key(d.mac));
        f->sender_instance = key(d.mac);
        flush_after_frame();

        activity = next_activity();
        seq = seq_++;
        std::uint16_t device_port = static_cast<std::uint16_t>(0xC000 + c.device);
        CmFrame ready = cm(d, ctl, device_port, kPnioCmUdpPort, CmDirection::Request, CmOperation::CControl,
                           rpc::kOpControl, activity, seq, rpc::pnio_controller_interface(), ctl);
        ready.control = ControlBlock{cm_block::kApplicationReadyReq, c.ar_uuid, c.session_key, 0x0002, 0};
        ready.ar_uuid = c.ar_uuid;
        f = &push({ctl.mac, d.mac, std::nullopt}, ready, "cm-application-ready-request", key(d.mac));
        f->sender_instance = key(d.mac);
        device_event(*f, d, event::kApplicationReady);
        connection_event(*f, c, event::kApplicationReady);
        flush_after_frame();

        CmFrame ready_res = cm(ctl, d, kPnioCmUdpPort, device_port, CmDirection::Response, CmOperation::CControl,
                               rpc::kOpControl, activity, seq, rpc::pnio_controller_interface(), ctl);
        ready_res.control = ControlBlock{cm_block::kApplicationReadyRes, c.ar_uuid, c.session_key, 0x0008, 0};
        ready_res.ar_uuid = c.ar_uuid;
        f = &push({d.mac, ctl.mac, std::nullopt}, ready_res, "cm-application-ready-response", key(d.mac));
        f->sender_instance = key(ctl.mac);
        device_event(*f, d, event::kConnectionConfirmed);
        flush_after_frame();
    }

    // ---- cyclic

    void cyclic(const ConnectionPlan& c, const CrPlan& cr, std::uint32_t round) {
        const Station& d = devices_[c.device];
        bool input = cr.type == IoCrType::Input;
        PnioCyclicFrame body;
        body.frame_id = cr.frame_id;
        body.data.assign(std::max<std::size_t>(cr.data_length, kMinCsduLength), 0);
        body.cycle_counter = static_cast<std::uint16_t>(round * 32u);
        std::vector<ProcessValue> values;
        for (const auto& [s, at] : cr.data) {
            ProcessValue v{cr.frame_id, s.direction, s.slot, s.subslot, {}};
            for (std::uint16_t k = 0; k < s.length; ++k) {
                std::uint64_t salt = (std::uint64_t{cr.frame_id} << 40) ^ (std::uint64_t{round} << 20) ^
                                     (std::uint64_t{s.slot} << 12) ^ (std::uint64_t{s.subslot} << 4) ^ k;
                auto byte = static_cast<std::uint8_t>(splitmix(spec_.seed ^ salt));
                body.data[at + k] = byte;
                v.bytes.push_back(byte);
            }
            body.data[at + s.length] = kIopsGood;
            values.push_back(std::move(v));
        }
        for (const auto& [s, at] : cr.iocs) body.data[at] = kIopsGood;

        const MacAddress& src = input ? d.mac : c.initiator;
        const MacAddress& dst = input ? c.initiator : d.mac;
        SynthFrame& f = push({dst, src, VlanTag{6, false, 0}}, body, input ? "pnio-input" : "pnio-output", key(d.mac));
        f.sender_instance = key(src);
        f.process_values = std::move(values);
        if (!cr.data.empty()) {
            device_event(f, d, event::kCyclicDataGood);
            connection_event(f, c, input ? event::kInputProcessDataSent : event::kOutputProcessDataSent);
            system_event(f, event::kCyclicDataGood);
        }
        flush_after_frame();
    }

    // ---- injections

    void inject(const Injection& inj, std::size_t k) {
        switch (inj.kind) {
            case InjectionKind::Rename: rename(*by_name(inj.target), inj.new_name); break;
            case InjectionKind::RogueConnect: rogue_connect(*by_name(inj.target), k); break;
            case InjectionKind::OrphanWrite: orphan_write(*by_name(inj.target), k); break;
            case InjectionKind::Malformed: malformed(inj, k); break;
        }
    }

    void rename(Station& target, const std::string& new_name) {
        const Station& a = attacker_;
        std::uint32_t xid = next_xid();
        SynthFrame* f = &push({kDcpIdentifyMulticast, a.mac, std::nullopt},
                              dcp(frame_id::kDcpIdentifyRequest, DcpServiceId::Identify, DcpServiceType::Request, xid,
                                  {DcpBlock{dcp::kOptionAll, 0xFF, std::nullopt, {}}}, 1),
                              "attack-identify-all", key(a.mac));
        f->sender_instance = key(a.mac);
        system_event(*f, event::kPnTrafficDetected);

        f = &push({a.mac, target.mac, std::nullopt},
                  dcp(frame_id::kDcpIdentifyResponse, DcpServiceId::Identify, DcpServiceType::ResponseSuccess, xid,
                      identify_answer(target)),
                  "attack-identify-response", key(target.mac));
        f->sender_instance = key(target.mac);

        xid = next_xid();
        f = &push({target.mac, a.mac, std::nullopt},
                  dcp(frame_id::kDcpGetSet, DcpServiceId::Set, DcpServiceType::Request, xid,
                      {make_dcp_name_block(new_name, 1)}),
                  "attack-set-name", key(target.mac));
        f->sender_instance = key(a.mac);
        device_event(*f, target, event::kNameSetRequested);
        f->expected_diagnostics.push_back(diagnostic_kind::kInventoryConflict);

        target.name = new_name;
        f = &push({a.mac, target.mac, std::nullopt},
                  dcp(frame_id::kDcpGetSet, DcpServiceId::Set, DcpServiceType::ResponseSuccess, xid,
                      {set_ack(dcp::kOptionDeviceProperties, dcp::kSubNameOfStation)}),
                  "attack-set-name-response", key(target.mac));
        f->sender_instance = key(target.mac);
    }

    void rogue_connect(const Station& target, std::size_t k) {
        std::size_t i = index_of(&target);
        ConnectionPlan c = plan(i, attacker_.mac, attacker_.ip, Uuid::from_seed(spec_.seed, 0x2000 + k),
                                static_cast<std::uint16_t>(0x100 + k),
                                static_cast<std::uint16_t>(frame_id::kCyclicFirst + 0x100 + 2 * k),
                                static_cast<std::uint16_t>(50000 + k));
        Uuid activity = next_activity();
        std::uint32_t seq = seq_++;
        SynthFrame* f = &push({target.mac, attacker_.mac, std::nullopt}, connect_request(c, attacker_, activity, seq),
                              "attack-connect-request", key(target.mac));
        f->sender_instance = key(attacker_.mac);
        f->opens_connection = OpenedConnection{make_connection_key(attacker_.mac, target.mac), key(attacker_.mac),
                                               key(target.mac)};
        device_event(*f, target, event::kConnectRequested);
        system_event(*f, event::kConnectRequested);

        CmFrame res = cm(target, attacker_, kPnioCmUdpPort, c.client_port, CmDirection::Response, CmOperation::Connect,
                         rpc::kOpConnect, activity, seq, rpc::pnio_device_interface(), target);
        res.pnio_status = {0xDB, 0x81, 0x01, 0x01};
        res.ar_response = ArBlockResponse{1, c.ar_uuid, c.session_key, target.mac, ethertype::kProfinet};
        res.ar_uuid = c.ar_uuid;
        f = &push({attacker_.mac, target.mac, std::nullopt}, res, "attack-connect-response", key(target.mac));
        f->sender_instance = key(target.mac);
    }

    void orphan_write(const Station& target, std::size_t k) {
        std::size_t i = index_of(&target);
        ConnectionPlan c = plan(i, controller_.mac, controller_.ip, Uuid::from_seed(spec_.seed, 0x3000 + k), 0, 0,
                                static_cast<std::uint16_t>(51000 + k));
        SynthFrame& f = push({target.mac, controller_.mac, std::nullopt},
                             write_request(c, c.ar_uuid, next_activity(), seq_++, 7), "orphan-write-request",
                             key(target.mac));
        f.sender_instance = key(controller_.mac);
        f.expected_diagnostics.push_back(diagnostic_kind::kOrphanFrame);
    }

    static std::vector<std::uint8_t> ethernet(const MacAddress& dst, const MacAddress& src, std::uint16_t type,
                                              std::span<const std::uint8_t> payload, bool pad) {
        ByteWriter w;
        w.mac(dst);
        w.mac(src);
        w.u16(type);
        w.bytes(payload);
        if (pad && w.size() < 60) w.zeros(60 - w.size());
        return w.take();
    }

    void malformed(const Injection& inj, std::size_t k) {
        const Station& s = inj.target.empty() ? controller_ : *by_name(inj.target);
        std::vector<std::uint8_t> bytes;
        LinkHeader link{kBroadcast, s.mac, std::nullopt};
        if (inj.protocol == "LLDP") {
            link.dst_mac = kLldpMulticast;
            const std::uint8_t p[] = {0x02, 0xFF, lldp::kSubtypeLocal, 'x'};
            bytes = ethernet(link.dst_mac, s.mac, ethertype::kLldp, p, true);
        } else if (inj.protocol == "ARP") {
            const std::uint8_t p[] = {0x00, 0x01, 0x08, 0x00, 0x06, 0x04, 0x00, 0x01, 0x00, 0x0E};
            bytes = ethernet(link.dst_mac, s.mac, ethertype::kArp, p, false);
        } else if (inj.protocol == "PN-DCP") {
            link.dst_mac = kDcpIdentifyMulticast;
            ByteWriter w;
            w.u16(frame_id::kDcpIdentifyRequest);
            w.u8(static_cast<std::uint8_t>(DcpServiceId::Identify));
            w.u8(0);
            w.u32(next_xid());
            w.u16(1);
            w.u16(0x0100);
            w.u8(dcp::kOptionAll);
            w.u8(0xFF);
            bytes = ethernet(link.dst_mac, s.mac, ethertype::kProfinet, w.buffer(), true);
        } else if (inj.protocol == "PN-CM") {
            const Station& d = devices_.empty() ? controller_ : devices_.front();
            CmFrame f = cm(controller_, d, static_cast<std::uint16_t>(52000 + k), kPnioCmUdpPort, CmDirection::Request,
                           CmOperation::Read, rpc::kOpRead, next_activity(), seq_++, rpc::pnio_device_interface(), d);
            f.rpc.flags1 = rpc::kFlagFragment;
            f.record = RecordHeader{1, Uuid::from_seed(spec_.seed, 0x4000 + k), 0, 1, 1, 0xAFF0, 64};
            f.ar_uuid = f.record->ar_uuid;
            link = {d.mac, controller_.mac, std::nullopt};
            bytes = encode_frame(link, f);
        } else {
            ByteWriter w;
            w.u16(frame_id::kCyclicFirst);
            w.u16(0);
            link.dst_mac = devices_.empty() ? controller_.mac : devices_.front().mac;
            bytes = ethernet(link.dst_mac, s.mac, ethertype::kProfinet, w.buffer(), false);
        }
        SynthFrame& f = push_raw(std::move(bytes), link, "malformed-" + inj.protocol, key(s.mac));
        f.expected_diagnostics.push_back(diagnostic_kind::kMalformedFrame);
    }

    const ScenarioSpec& spec_;
    Station controller_;
    std::vector<Station> devices_;
    Station attacker_;
    std::vector<ConnectionPlan> connections_;
    std::vector<SynthFrame> frames_;
    std::vector<std::size_t> pending_after_frame_;
    std::vector<bool> done_;
    bool injecting_{false};
    std::int64_t clock_{0};
    std::int64_t gap_ns_{0};
    std::int64_t cycle_ns_{0};
    std::uint64_t xid_{0};
    std::uint64_t activity_{0};
    std::uint32_t seq_{0};
    std::uint32_t ip_id_{1};
};

/// Replays the intended events through fresh FSM instances to produce the expected verdicts.
class Replayer {
public:
    explicit Replayer(std::string system_name) : system_(system_fsm_table(), std::move(system_name)) {}

    Json run(std::vector<SynthFrame>& frames) {
        Json anomalies = Json::array();
        Json diagnostics = Json::array();
        for (std::size_t i = 0; i < frames.size(); ++i) {
            SynthFrame& f = frames[i];
            FrameProvenance cause{i, "synth", f.intent};
            const std::string sys_before = system_.state();
            if (f.sender_instance) device(*f.sender_instance);
            bool is_new = false;
            if (f.opens_connection) {
                device(f.opens_connection->initiator);
                device(f.opens_connection->responder);
                if (!connections_.count(f.opens_connection->key)) {
                    connections_.emplace(f.opens_connection->key,
                                         FsmInstance(connection_fsm_table(), f.opens_connection->key));
                    is_new = true;
                }
            }
            for (const auto& d : f.expected_diagnostics) diagnostics.push_back(Json{{"index", i}, {"kind", d}});

            std::vector<IntendedEvent> effective;
            for (IntendedEvent e : f.events) {
                if (e.kind == FsmKind::System) {
                    if (!gate_open(e.event, sys_before)) continue;
                    e.key = system_.key();
                }
                effective.push_back(e);
                auto rejected = [&](const TransitionRecord& r, FsmKind kind, const std::string& key) {
                    if (r.verdict != Verdict::Rejected) return false;
                    anomalies.push_back(Json{{"index", i},
                                             {"instance_kind", to_string(kind)},
                                             {"instance_key", key},
                                             {"state_at_event", r.from_state},
                                             {"offending_event", r.event}});
                    return true;
                };
                switch (e.kind) {
                    case FsmKind::Device: {
                        const auto& r = device(e.key).fire(e.event, cause, {});
                        if (rejected(r, FsmKind::Device, e.key) && e.event == event::kConnectRequested && is_new)
                            diagnostics.push_back(Json{{"index", i}, {"kind", diagnostic_kind::kRejectedConnect}});
                        break;
                    }
                    case FsmKind::Connection: {
                        auto& inst = connections_.at(e.key);
                        rejected(inst.fire(e.event, cause, {}), FsmKind::Connection, e.key);
                        if (!composite_ && std::all_of(connections_.begin(), connections_.end(), [](const auto& kv) {
                                return connection_is_established(kv.second.state());
                            })) {
                            composite_ = true;
                            effective.push_back({FsmKind::System, system_.key(), event::kAllConnectionsEstablished});
                            rejected(system_.fire(event::kAllConnectionsEstablished, cause, {}), FsmKind::System,
                                     system_.key());
                        }
                        break;
                    }
                    case FsmKind::System:
                        rejected(system_.fire(e.event, cause, {}), FsmKind::System, system_.key());
                        break;
                }
            }
            f.events = std::move(effective);
        }

        Json finals;
        finals["system"] = system_.state();
        Json devs = Json::object();
        for (const auto& [k, inst] : devices_) devs[k] = inst.state();
        finals["devices"] = std::move(devs);
        Json conns = Json::object();
        for (const auto& [k, inst] : connections_) conns[k] = inst.state();
        finals["connections"] = std::move(conns);
        return Json{{"anomalies", std::move(anomalies)},
                    {"diagnostics", std::move(diagnostics)},
                    {"all_connections_established", composite_},
                    {"final_states", std::move(finals)}};
    }

private:
    static bool gate_open(const std::string& ev, const std::string& sys) {
        if (ev == event::kPnTrafficDetected) return sys == ds::kInactive || sys == ds::kPoweredOn;
        if (ev == event::kCyclicDataGood || ev == event::kAcyclicWrite || ev == event::kAcyclicRead ||
            ev == event::kAcyclicDone)
            return sys == ds::kDataExchange;
        return true;
    }

    FsmInstance& device(const std::string& key) {
        auto it = devices_.find(key);
        if (it == devices_.end()) it = devices_.emplace(key, FsmInstance(device_fsm_table(), key)).first;
        return it->second;
    }

    FsmInstance system_;
    std::map<std::string, FsmInstance> devices_;
    std::map<std::string, FsmInstance> connections_;
    bool composite_{false};
};

Json event_json(const IntendedEvent& e) {
    return Json{{"kind", to_string(e.kind)}, {"key", e.key}, {"event", e.event}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenario documents

ScenarioSpec scenario_from_json(const Json& doc) {
    try {
        ScenarioSpec s;
        s.name = doc.value("name", s.name);
        s.seed = doc.value("seed", s.seed);
        const Json& c = doc.at("controller");
        s.controller.mac = parse_or_throw<MacAddress>(c.at("mac"), "MAC");
        s.controller.name = c.at("name").get<std::string>();
        s.controller.ip = parse_or_throw<Ipv4Address>(c.at("ip"), "IPv4 address");
        s.controller.port_count = c.value("port_count", s.controller.port_count);
        for (const auto& d : doc.value("devices", Json::array())) {
            DeviceSpec dev;
            dev.mac = parse_or_throw<MacAddress>(d.at("mac"), "MAC");
            dev.name = d.at("name").get<std::string>();
            dev.ip = parse_or_throw<Ipv4Address>(d.at("ip"), "IPv4 address");
            dev.port_count = d.value("port_count", dev.port_count);
            dev.vendor_id = d.value("vendor_id", dev.vendor_id);
            dev.device_id = d.value("device_id", dev.device_id);
            for (const auto& m : d.at("submodules")) {
                SubmoduleSpec sm;
                sm.slot = m.value("slot", sm.slot);
                sm.subslot = m.value("subslot", sm.subslot);
                sm.direction = parse_direction(m.value("direction", std::string("input")));
                sm.length = m.at("length").get<std::uint16_t>();
                dev.submodules.push_back(sm);
            }
            s.devices.push_back(std::move(dev));
        }
        if (doc.contains("timing")) {
            const Json& t = doc.at("timing");
            s.timing.inter_frame_gap = t.value("inter_frame_gap", s.timing.inter_frame_gap);
            s.timing.cycle_interval = t.value("cycle_interval", s.timing.cycle_interval);
            s.timing.cycles = t.value("cycles", s.timing.cycles);
            if (t.contains("start")) s.timing.start = parse_or_throw<Timestamp>(t.at("start"), "timestamp");
        }
        s.lldp_refresh_every = doc.value("lldp_refresh_every", s.lldp_refresh_every);
        s.lldp_during_startup = doc.value("lldp_during_startup", s.lldp_during_startup);
        s.attacker_mac = doc.contains("attacker_mac") ? parse_or_throw<MacAddress>(doc.at("attacker_mac"), "MAC")
                                                      : *MacAddress::parse("02:00:00:00:00:66");
        s.attacker_ip = doc.contains("attacker_ip") ? parse_or_throw<Ipv4Address>(doc.at("attacker_ip"), "IPv4 address")
                                                    : *Ipv4Address::parse("192.168.0.66");
        for (const auto& j : doc.value("injections", Json::array())) {
            Injection inj;
            auto kind = j.at("kind").get<std::string>();
            if (kind == "rename") inj.kind = InjectionKind::Rename;
            else if (kind == "rogue_connect") inj.kind = InjectionKind::RogueConnect;
            else if (kind == "malformed") inj.kind = InjectionKind::Malformed;
            else if (kind == "orphan_write") inj.kind = InjectionKind::OrphanWrite;
            else throw InvalidScenario("unknown injection kind '" + kind + "'");
            auto pos = j.value("position", std::string("after_cycle"));
            if (pos == "after_frame") inj.position = InjectionPosition::AfterFrame;
            else if (pos == "after_cycle") inj.position = InjectionPosition::AfterCycle;
            else if (pos == "before_connect") inj.position = InjectionPosition::BeforeConnect;
            else throw InvalidScenario("unknown injection position '" + pos + "'");
            inj.index = j.value("index", inj.index);
            inj.target = j.value("target", inj.target);
            inj.new_name = j.value("new_name", inj.new_name);
            inj.protocol = j.value("protocol", inj.protocol);
            s.injections.push_back(std::move(inj));
        }
        return s;
    } catch (const Json::exception& e) {
        throw InvalidScenario(std::string("scenario document: ") + e.what());
    }
}

Json scenario_to_json(const ScenarioSpec& s) {
    Json doc;
    doc["name"] = s.name;
    doc["seed"] = s.seed;
    doc["controller"] = Json{{"mac", s.controller.mac.to_string()},
                             {"name", s.controller.name},
                             {"ip", s.controller.ip.to_string()},
                             {"port_count", s.controller.port_count}};
    Json devs = Json::array();
    for (const auto& d : s.devices) {
        Json subs = Json::array();
        for (const auto& m : d.submodules)
            subs.push_back(Json{{"slot", m.slot}, {"subslot", m.subslot}, {"direction", direction_name(m.direction)},
                                {"length", m.length}});
        devs.push_back(Json{{"mac", d.mac.to_string()},
                            {"name", d.name},
                            {"ip", d.ip.to_string()},
                            {"port_count", d.port_count},
                            {"vendor_id", d.vendor_id},
                            {"device_id", d.device_id},
                            {"submodules", std::move(subs)}});
    }
    doc["devices"] = std::move(devs);
    doc["timing"] = Json{{"inter_frame_gap", s.timing.inter_frame_gap},
                         {"cycle_interval", s.timing.cycle_interval},
                         {"cycles", s.timing.cycles},
                         {"start", s.timing.start.to_string()}};
    doc["lldp_refresh_every"] = s.lldp_refresh_every;
    doc["lldp_during_startup"] = s.lldp_during_startup;
    doc["attacker_mac"] = s.attacker_mac.to_string();
    doc["attacker_ip"] = s.attacker_ip.to_string();
    Json inj = Json::array();
    for (const auto& i : s.injections) {
        Json j{{"kind", to_string(i.kind)}, {"position", to_string(i.position)}, {"index", i.index}};
        if (!i.target.empty()) j["target"] = i.target;
        if (!i.new_name.empty()) j["new_name"] = i.new_name;
        if (!i.protocol.empty()) j["protocol"] = i.protocol;
        inj.push_back(std::move(j));
    }
    doc["injections"] = std::move(inj);
    return doc;
}

void validate_scenario(const ScenarioSpec& s) {
    std::set<MacAddress> macs;
    auto claim_mac = [&](const MacAddress& m, const std::string& who) {
        if (m.is_zero() || m.is_multicast()) throw InvalidScenario(who + " MAC " + m.to_string() + " is not unicast");
        if (!macs.insert(m).second) throw InvalidScenario("MAC " + m.to_string() + " of " + who + " is used twice");
    };
    std::set<Ipv4Address> ips;
    auto claim_ip = [&](const Ipv4Address& ip, const std::string& who) {
        if (ip.is_unspecified()) throw InvalidScenario(who + " has no IP address");
        if (!ips.insert(ip).second) throw InvalidScenario("IP " + ip.to_string() + " of " + who + " is used twice");
    };
    std::set<std::string> names;
    auto claim_name = [&](const std::string& name, const std::string& who) {
        auto v = station_name_violations(name);
        if (!v.empty()) throw InvalidScenario(who + " name '" + name + "': " + v.front());
        if (!names.insert(name).second) throw InvalidScenario("station name '" + name + "' is used twice");
    };
    auto claim_ports = [&](const MacAddress& iface, std::uint32_t count, const std::string& who) {
        if (count == 0 || count > 255) throw InvalidScenario(who + " port count must be 1..255");
        for (std::uint32_t p = 0; p < count; ++p) claim_mac(iface.offset(p + 1), who + " port");
    };

    claim_mac(s.controller.mac, "controller");
    claim_ports(s.controller.mac, s.controller.port_count, "controller");
    claim_ip(s.controller.ip, "controller");
    claim_name(s.controller.name, "controller");
    for (const auto& d : s.devices) {
        claim_mac(d.mac, d.name);
        claim_ports(d.mac, d.port_count, d.name);
        claim_ip(d.ip, d.name);
        claim_name(d.name, "device");
        if (d.submodules.empty()) throw InvalidScenario("device '" + d.name + "' has no submodules");
        std::set<std::pair<std::uint16_t, std::uint16_t>> seen;
        std::size_t total = 0;
        for (const auto& m : d.submodules) {
            if (m.length == 0) throw InvalidScenario("device '" + d.name + "' has a zero-length submodule");
            if (!seen.insert({m.slot, m.subslot}).second)
                throw InvalidScenario("device '" + d.name + "' repeats a slot/subslot");
            total += m.length + 2;
        }
        if (total > 1440) throw InvalidScenario("device '" + d.name + "' process data exceeds one frame");
    }
    if (s.devices.size() > 120) throw InvalidScenario("at most 120 devices are supported");
    claim_mac(s.attacker_mac, "attacker");
    claim_ip(s.attacker_ip, "attacker");
    if (!(s.timing.inter_frame_gap >= 1e-6)) throw InvalidScenario("inter_frame_gap must be at least 1 microsecond");
    if (!(s.timing.cycle_interval >= 1e-6)) throw InvalidScenario("cycle_interval must be at least 1 microsecond");
    if (s.timing.cycles > 1'000'000) throw InvalidScenario("too many cycles");

    for (const auto& inj : s.injections) {
        bool needs_target = inj.kind != InjectionKind::Malformed;
        if (!inj.target.empty() || needs_target) {
            bool found = std::any_of(s.devices.begin(), s.devices.end(), [&](const auto& d) { return d.name == inj.target; });
            if (!found) throw InvalidScenario("injection target '" + inj.target + "' is not a device");
        }
        if (inj.kind == InjectionKind::Rename) {
            auto v = station_name_violations(inj.new_name);
            if (!v.empty()) throw InvalidScenario("rename to '" + inj.new_name + "': " + v.front());
        }
        if (inj.kind == InjectionKind::Malformed && !kMalformedProtocols.count(inj.protocol))
            throw InvalidScenario("malformed injection protocol '" + inj.protocol + "' is not supported");
    }
}

// ---------------------------------------------------------------------------

std::vector<RawFrame> SynthOutput::raw_frames() const {
    std::vector<RawFrame> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(f.raw);
    return out;
}

SynthOutput synthesize(const ScenarioSpec& spec, const std::string& system_name) {
    validate_scenario(spec);
    SynthOutput out;
    out.frames = Generator(spec).run();
    Json expected = Replayer(system_name).run(out.frames);

    Json frames = Json::array();
    Json process = Json::array();
    for (std::size_t i = 0; i < out.frames.size(); ++i) {
        const auto& f = out.frames[i];
        Json events = Json::array();
        for (const auto& e : f.events) events.push_back(event_json(e));
        frames.push_back(Json{{"index", i},
                              {"timestamp", f.raw.timestamp.to_string()},
                              {"event", f.intent},
                              {"subject", f.subject},
                              {"events", std::move(events)}});
        for (const auto& v : f.process_values)
            process.push_back(Json{{"index", i},
                                   {"frame_id", v.frame_id},
                                   {"direction", direction_name(v.direction)},
                                   {"slot", v.slot},
                                   {"subslot", v.subslot},
                                   {"bytes", to_hex_string(v.bytes.data(), v.bytes.size())}});
    }
    out.manifest = Json{{"scenario", scenario_to_json(spec)},
                        {"frames", std::move(frames)},
                        {"expected", std::move(expected)},
                        {"process_data", std::move(process)}};
    return out;
}

// ---------------------------------------------------------------------------
// Builtins

ScenarioSpec normal_startup_spec(std::size_t count, bool lldp_refresh) {
    static const char* kNames[] = {"lift-motor", "turntable-motor", "conveyor-drive", "gripper-valve", "sorter-io"};
    ScenarioSpec s;
    s.name = "normal-" + std::to_string(count) + (lldp_refresh ? "-lldp" : "");
    s.seed = 7;
    s.controller = {*MacAddress::parse("00:0e:cf:10:00:00"), "plc-3", *Ipv4Address::parse("192.168.0.1"), 1};
    for (std::size_t i = 0; i < count; ++i) {
        DeviceSpec d;
        d.mac = MacAddress({0x00, 0x0E, 0xCF, 0x20, static_cast<std::uint8_t>(i >> 4), static_cast<std::uint8_t>((i & 0x0F) << 4)});
        d.name = i < std::size(kNames) ? kNames[i] : "io-device-" + std::to_string(i + 1);
        d.ip = Ipv4Address(0xC0A80000u + 10 + static_cast<std::uint32_t>(i));
        d.device_id = static_cast<std::uint16_t>(0x0101 + i);
        d.submodules = {{1, 1, DataDirection::Input, static_cast<std::uint16_t>(2 + i % 3)},
                        {2, 1, DataDirection::Output, static_cast<std::uint16_t>(1 + i % 4)}};
        s.devices.push_back(std::move(d));
    }
    s.attacker_mac = *MacAddress::parse("02:00:00:00:00:66");
    s.attacker_ip = *Ipv4Address::parse("192.168.0.66");
    if (lldp_refresh) {
        s.lldp_refresh_every = 3;
        s.lldp_during_startup = true;
    }
    return s;
}

std::vector<std::string> builtin_scenario_names() {
    return {"normal-startup", "normal-1",      "normal-2",     "normal-5",       "normal-1-lldp",
            "normal-2-lldp",  "normal-5-lldp", "rename-attack", "rogue-connect", "orphan-write",
            "malformed-mix",  "two-submodule", "empty"};
}

ScenarioSpec builtin_scenario(const std::string& name) {
    auto named = [&](ScenarioSpec s) {
        s.name = name;
        return s;
    };
    if (name == "normal-startup") return named(normal_startup_spec(2));
    for (std::size_t n : {1, 2, 5}) {
        if (name == "normal-" + std::to_string(n)) return normal_startup_spec(n);
        if (name == "normal-" + std::to_string(n) + "-lldp") return normal_startup_spec(n, true);
    }
    if (name == "rename-attack") {
        ScenarioSpec s = named(normal_startup_spec(2));
        s.injections.push_back({InjectionKind::Rename, InjectionPosition::AfterCycle, 4, "turntable-motor", "ufo", ""});
        return s;
    }
    if (name == "rogue-connect") {
        ScenarioSpec s = named(normal_startup_spec(2));
        s.injections.push_back({InjectionKind::RogueConnect, InjectionPosition::AfterCycle, 4, "lift-motor", "", ""});
        return s;
    }
    if (name == "orphan-write") {
        ScenarioSpec s = named(normal_startup_spec(2));
        s.injections.push_back({InjectionKind::OrphanWrite, InjectionPosition::BeforeConnect, 0, "lift-motor", "", ""});
        return s;
    }
    if (name == "malformed-mix") {
        ScenarioSpec s = named(normal_startup_spec(2));
        std::uint64_t cycle = 1;
        for (const char* p : {"LLDP", "ARP", "PN-DCP", "PN-CM", "PNIO"})
            s.injections.push_back({InjectionKind::Malformed, InjectionPosition::AfterCycle, cycle++, "", "", p});
        return s;
    }
    if (name == "two-submodule") {
        ScenarioSpec s = named(normal_startup_spec(1));
        s.devices[0].submodules = {{1, 1, DataDirection::Input, 2}, {1, 2, DataDirection::Output, 4}};
        return s;
    }
    if (name == "empty") return named(normal_startup_spec(0));
    throw InvalidScenario("unknown builtin scenario '" + name + "'");
}

}  // namespace poet

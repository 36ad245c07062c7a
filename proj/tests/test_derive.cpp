#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "poet/derive.hpp"
#include "test_support.hpp"

using namespace poet;
using poet::testing::ip;
using poet::testing::mac;

namespace {

const MacAddress kCtl = mac("00:0e:cf:10:00:00");
const MacAddress kDev = mac("00:0e:cf:20:00:00");
const Uuid kAr = Uuid::from_seed(1, 1);

struct Fixture {
    DerivationContext ctx;
    AssetInventory inv;
    std::map<MacAddress, std::string> devices;
    std::map<std::string, std::string> connections;
    std::string system = system_state::kInactive;

    StateView view() const {
        StateView v;
        v.device_state = [this](const MacAddress& m) -> std::optional<std::string> {
            auto it = devices.find(m);
            if (it == devices.end()) return std::nullopt;
            return it->second;
        };
        v.connection_state = [this](const std::string& k) -> std::optional<std::string> {
            auto it = connections.find(k);
            if (it == connections.end()) return std::nullopt;
            return it->second;
        };
        v.system_state = system;
        return v;
    }
    Derivation derive(const ParsedFrame& f) { return derive_events(f, ctx, inv, view()); }
    Derivation derive_apply(const ParsedFrame& f) {
        Derivation d = derive(f);
        apply_derivation(ctx, d, f.capture_index);
        return d;
    }
};

ParsedFrame frame(const MacAddress& src, const MacAddress& dst, FrameBody body, std::uint64_t index = 0) {
    ParsedFrame f;
    f.envelope.src_mac = src;
    f.envelope.dst_mac = dst;
    f.body = std::move(body);
    f.capture_index = index;
    return f;
}

std::vector<std::string> names(const Derivation& d, std::optional<FsmKind> kind = std::nullopt) {
    std::vector<std::string> out;
    for (const auto& e : d.events)
        if (!kind || e.target == *kind) out.push_back(e.event_name);
    return out;
}

LldpFrame make_lldp(std::uint16_t ttl) {
    LldpFrame f;
    f.chassis_id = {lldp::kSubtypeLocal, {'d', 'e', 'v'}};
    f.port_id = {lldp::kSubtypeLocal, {'p', '1'}};
    f.ttl_seconds = ttl;
    f.station_name = "dev";
    f.profinet_tlvs = {make_profinet_chassis_mac_tlv(kDev)};
    return f;
}

DcpFrame identify(DcpServiceType type, std::uint32_t xid, std::optional<std::string> name) {
    DcpFrame f;
    f.frame_id = type == DcpServiceType::Request ? frame_id::kDcpIdentifyRequest : frame_id::kDcpIdentifyResponse;
    f.service_type = type;
    f.xid = xid;
    if (name) f.blocks.push_back(make_dcp_name_block(*name, type == DcpServiceType::Request ? std::nullopt : std::optional<std::uint16_t>(0)));
    return f;
}

DcpFrame set_request(std::uint32_t xid, bool with_ip, std::optional<std::string> name = std::nullopt) {
    DcpFrame f;
    f.frame_id = frame_id::kDcpGetSet;
    f.service_id = DcpServiceId::Set;
    f.xid = xid;
    if (with_ip) f.blocks.push_back(make_dcp_ip_block({ip("192.168.0.10"), ip("255.255.255.0"), {}}, 1));
    if (name) f.blocks.push_back(make_dcp_name_block(*name, 1));
    return f;
}

DcpFrame set_response(std::uint32_t xid) {
    DcpFrame f;
    f.frame_id = frame_id::kDcpGetSet;
    f.service_id = DcpServiceId::Set;
    f.service_type = DcpServiceType::ResponseSuccess;
    f.xid = xid;
    return f;
}

IocrDescriptor cr(IoCrType type, std::uint16_t ref, std::uint16_t fid) {
    IocrDescriptor d;
    d.type = type;
    d.reference = ref;
    d.frame_id = fid;
    d.data_length = 40;
    return d;
}

ExpectedSubmodule submodule(std::uint16_t slot, std::uint16_t props, DataDescription desc) {
    ExpectedSubmodule e;
    e.slot = slot;
    e.subslot = 1;
    e.submodule_properties = props;
    e.data_descriptions = {desc};
    return e;
}

CmFrame cm(CmOperation op, CmDirection dir, const Uuid& ar = kAr) {
    CmFrame f;
    f.operation = op;
    f.direction = dir;
    f.ar_uuid = ar;
    return f;
}

CmFrame connect_request() {
    CmFrame f = cm(CmOperation::Connect, CmDirection::Request);
    f.iocr_blocks = {cr(IoCrType::Input, 1, 0x8000), cr(IoCrType::Output, 2, 0x8001)};
    f.expected_submodules = {submodule(1, 1, {DataDirection::Input, 2, 1, 1}),
                             submodule(2, 2, {DataDirection::Output, 4, 1, 1})};
    return f;
}

PnioCyclicFrame cyclic(std::uint16_t fid, std::uint8_t fill) {
    PnioCyclicFrame f;
    f.frame_id = fid;
    f.data.assign(40, fill);
    return f;
}

}  // namespace

TEST(Derive, ConnectionKeyIsBareHexPair) {
    EXPECT_EQ(make_connection_key(kCtl, kDev), "000ecf100000-000ecf200000");
}

TEST(Derive, LldpDetectsNeighboursAndPowersOnSystem) {
    Fixture fx;
    Derivation d = fx.derive(frame(kDev.offset(1), mac("01:80:c2:00:00:0e"), make_lldp(20)));
    ASSERT_EQ(d.events.size(), 2u);
    EXPECT_EQ(d.events[0].event_name, event::kDetectNeighbours);
    EXPECT_EQ(d.events[0].subject_mac, kDev) << "chassis MAC TLV names the interface";
    EXPECT_EQ(d.events[1].event_name, event::kPnTrafficDetected);
    EXPECT_EQ(d.events[1].target, FsmKind::System);

    fx.system = system_state::kDataExchange;
    EXPECT_EQ(names(fx.derive(frame(kDev, kCtl, make_lldp(20)))), std::vector<std::string>{event::kDetectNeighbours});
}

TEST(Derive, LldpShutdownIsViolationWithoutEvents) {
    Fixture fx;
    Derivation d = fx.derive(frame(kDev, kCtl, make_lldp(0)));
    EXPECT_TRUE(d.events.empty());
    ASSERT_EQ(d.diagnostics.size(), 1u);
    EXPECT_EQ(d.diagnostics[0].kind, diagnostic_kind::kProtocolViolation);
}

TEST(Derive, OnlyGratuitousArpForKnownDeviceCounts) {
    Fixture fx;
    ArpPacket probe{ArpOperation::Request, kDev, {}, ip("192.168.0.10"), ip("192.168.0.10")};
    ArpPacket query{ArpOperation::Request, kDev, {}, ip("192.168.0.10"), ip("192.168.0.1")};
    EXPECT_TRUE(fx.derive(frame(kDev, mac("ff:ff:ff:ff:ff:ff"), probe)).events.empty());
    fx.devices[kDev] = device_state::kIpAddressAssigned;
    EXPECT_EQ(names(fx.derive(frame(kDev, mac("ff:ff:ff:ff:ff:ff"), probe))),
              std::vector<std::string>{event::kDuplicationCheck});
    EXPECT_TRUE(fx.derive(frame(kDev, mac("ff:ff:ff:ff:ff:ff"), query)).events.empty());
}

TEST(Derive, NamedIdentifyDefersUntilResponse) {
    Fixture fx;
    Derivation req = fx.derive_apply(frame(kCtl, mac("01:0e:cf:00:00:00"), identify(DcpServiceType::Request, 7, "dev"), 1));
    EXPECT_EQ(names(req), std::vector<std::string>{event::kPnTrafficDetected});
    ASSERT_EQ(fx.ctx.deferred.size(), 1u);
    EXPECT_EQ(fx.ctx.pending_identify.at(7), "dev");

    Derivation resp = fx.derive_apply(frame(kDev, kCtl, identify(DcpServiceType::ResponseSuccess, 7, "dev"), 2));
    EXPECT_EQ(names(resp), (std::vector<std::string>{event::kNameResolutionRequested, event::kNameResolved}));
    EXPECT_EQ(resp.events[0].subject_mac, kDev);
    EXPECT_EQ(resp.events[0].peer_mac, kCtl);
    EXPECT_FALSE(resp.events[0].deferred_name);
    EXPECT_TRUE(fx.ctx.deferred.empty());
    EXPECT_TRUE(fx.ctx.pending_identify.empty());
}

TEST(Derive, NamedIdentifyForKnownNameIsImmediate) {
    Fixture fx;
    ParsedFrame announce = frame(kDev, kCtl, identify(DcpServiceType::ResponseSuccess, 1, "dev"));
    fx.inv.update_from_frame(announce, {});
    Derivation d = fx.derive(frame(kCtl, mac("01:0e:cf:00:00:00"), identify(DcpServiceType::Request, 9, "dev")));
    EXPECT_EQ(names(d, FsmKind::Device), std::vector<std::string>{event::kNameResolutionRequested});
    EXPECT_EQ(d.events.back().subject_mac, kDev);
    EXPECT_TRUE(d.defer.empty());
}

TEST(Derive, UnsolicitedIdentifyResponseIsIgnored) {
    Fixture fx;
    EXPECT_TRUE(fx.derive(frame(kDev, kCtl, identify(DcpServiceType::ResponseSuccess, 3, "dev"))).events.empty());
}

TEST(Derive, IdentifyAllLeavesNothingPending) {
    Fixture fx;
    Derivation d = fx.derive_apply(frame(kCtl, mac("01:0e:cf:00:00:00"), identify(DcpServiceType::Request, 4, std::nullopt)));
    EXPECT_TRUE(fx.ctx.pending_identify.empty());
    EXPECT_TRUE(d.defer.empty());
}

TEST(Derive, SetIpThenResponseAssigns) {
    Fixture fx;
    fx.devices[kDev] = device_state::kNameResolved;
    Derivation req = fx.derive_apply(frame(kCtl, kDev, set_request(11, true)));
    EXPECT_EQ(names(req), std::vector<std::string>{event::kIpAssignmentRequested});
    EXPECT_EQ(req.events[0].detail, "192.168.0.10");
    Derivation resp = fx.derive_apply(frame(kDev, kCtl, set_response(11)));
    EXPECT_EQ(names(resp), std::vector<std::string>{event::kIpAssigned});
    EXPECT_TRUE(fx.ctx.pending_sets.empty());
}

TEST(Derive, SetResponseFromWrongStationIsIgnored) {
    Fixture fx;
    fx.derive_apply(frame(kCtl, kDev, set_request(11, true)));
    EXPECT_TRUE(fx.derive(frame(mac("00:0e:cf:99:00:00"), kCtl, set_response(11))).events.empty());
}

TEST(Derive, SetOnEstablishedDeviceUsesAttackEvents) {
    Fixture fx;
    fx.devices[kDev] = device_state::kDataExchange;
    EXPECT_EQ(names(fx.derive(frame(kCtl, kDev, set_request(1, true, "ufo")))),
              (std::vector<std::string>{event::kIpSetOnEstablished, event::kNameSetRequested}));
    EXPECT_TRUE(fx.derive(frame(kCtl, mac("01:0e:cf:00:00:00"), set_request(2, true))).events.empty());
}

TEST(Derive, ConnectOpensConnection) {
    Fixture fx;
    fx.system = system_state::kDataExchange;
    Derivation d = fx.derive_apply(frame(kCtl, kDev, connect_request()));
    EXPECT_EQ(names(d), (std::vector<std::string>{event::kConnectRequested, event::kConnectRequested}));
    EXPECT_EQ(d.events[0].target, FsmKind::Device);
    EXPECT_EQ(d.events[0].subject_mac, kDev);
    EXPECT_EQ(d.events[1].target, FsmKind::System) << "connect is never gated by system state";
    ASSERT_TRUE(d.open_connection);
    EXPECT_EQ(d.open_connection->key, make_connection_key(kCtl, kDev));
    EXPECT_EQ(d.open_connection->crs.size(), 2u);
    EXPECT_EQ(d.open_connection->specs.size(), 2u);
    EXPECT_EQ(fx.ctx.ar_index.at(kAr), d.open_connection->key);
    EXPECT_EQ(fx.ctx.cyclic_routes.size(), 2u);
}

TEST(Derive, InconsistentConnectStillOpens) {
    Fixture fx;
    CmFrame c = connect_request();
    c.iocr_blocks[0].data_objects = {{0, 9, 1, 0}};
    Derivation d = fx.derive(frame(kCtl, kDev, c));
    ASSERT_EQ(d.diagnostics.size(), 1u);
    EXPECT_EQ(d.diagnostics[0].kind, diagnostic_kind::kInconsistentConnect);
    ASSERT_TRUE(d.open_connection);
    EXPECT_TRUE(d.open_connection->specs.empty());
    EXPECT_EQ(names(d, FsmKind::Device), std::vector<std::string>{event::kConnectRequested});
}

TEST(Derive, ConnectResponseUpdatesFrameIds) {
    Fixture fx;
    fx.derive_apply(frame(kCtl, kDev, connect_request()));
    CmFrame resp = cm(CmOperation::Connect, CmDirection::Response);
    resp.iocr_responses = {{IoCrType::Input, 1, 0x8010}, {IoCrType::Output, 2, 0x8011}};
    Derivation d = fx.derive_apply(frame(kDev, kCtl, resp));
    EXPECT_TRUE(d.events.empty());
    ASSERT_TRUE(d.update_connection);
    EXPECT_TRUE(fx.ctx.cyclic_routes.count({0x8010, kDev, kCtl}));
    EXPECT_TRUE(fx.ctx.cyclic_routes.count({0x8011, kCtl, kDev}));
    EXPECT_FALSE(fx.ctx.cyclic_routes.count({0x8000, kDev, kCtl}));
}

TEST(Derive, StartupWritesAreParametrization) {
    Fixture fx;
    fx.derive_apply(frame(kCtl, kDev, connect_request()));
    Derivation d = fx.derive(frame(kCtl, kDev, cm(CmOperation::Write, CmDirection::Request)));
    EXPECT_EQ(names(d), (std::vector<std::string>{event::kParametrizationWrite, event::kParametrizationWrite}));
    EXPECT_EQ(d.events[1].target, FsmKind::Connection);
    EXPECT_EQ(d.events[1].connection_key, make_connection_key(kCtl, kDev));
    EXPECT_TRUE(fx.derive(frame(kDev, kCtl, cm(CmOperation::Write, CmDirection::Response))).events.empty());
}

TEST(Derive, ControlSequence) {
    Fixture fx;
    fx.derive_apply(frame(kCtl, kDev, connect_request()));
    EXPECT_EQ(names(fx.derive(frame(kCtl, kDev, cm(CmOperation::DControl, CmDirection::Request)))),
              (std::vector<std::string>{event::kEndOfParametrization, event::kEndOfParametrization}));
    EXPECT_TRUE(fx.derive(frame(kDev, kCtl, cm(CmOperation::DControl, CmDirection::Response))).events.empty());
    EXPECT_EQ(names(fx.derive(frame(kDev, kCtl, cm(CmOperation::CControl, CmDirection::Request)))),
              (std::vector<std::string>{event::kApplicationReady, event::kApplicationReady}));
    EXPECT_EQ(names(fx.derive(frame(kCtl, kDev, cm(CmOperation::CControl, CmDirection::Response)))),
              std::vector<std::string>{event::kConnectionConfirmed});
}

TEST(Derive, AcyclicWriteAndDoneDuringExchange) {
    Fixture fx;
    fx.derive_apply(frame(kCtl, kDev, connect_request()));
    const std::string key = make_connection_key(kCtl, kDev);
    fx.connections[key] = connection_state::kInputDataExchange;
    fx.system = system_state::kDataExchange;
    EXPECT_EQ(names(fx.derive(frame(kCtl, kDev, cm(CmOperation::Write, CmDirection::Request)))),
              (std::vector<std::string>{event::kAcyclicWrite, event::kAcyclicWrite, event::kAcyclicWrite}));

    fx.connections[key] = connection_state::kAcyclicParametrization;
    EXPECT_EQ(names(fx.derive(frame(kDev, kCtl, cm(CmOperation::Write, CmDirection::Response)))),
              (std::vector<std::string>{event::kAcyclicDone, event::kAcyclicDone, event::kAcyclicDone}));

    fx.system = system_state::kAssetConfigurationAndSystemStartup;
    EXPECT_EQ(names(fx.derive(frame(kCtl, kDev, cm(CmOperation::Read, CmDirection::Request))), FsmKind::System).size(),
              0u);
}

TEST(Derive, UnknownArIsOrphan) {
    Fixture fx;
    Derivation d = fx.derive(frame(kCtl, kDev, cm(CmOperation::Write, CmDirection::Request, Uuid::from_seed(9, 9))));
    EXPECT_TRUE(d.events.empty());
    ASSERT_EQ(d.diagnostics.size(), 1u);
    EXPECT_EQ(d.diagnostics[0].kind, diagnostic_kind::kOrphanFrame);
    EXPECT_EQ(d.diagnostics[0].subject, kDev);
    EXPECT_TRUE(fx.derive(frame(kCtl, kDev, cm(CmOperation::Release, CmDirection::Request, Uuid::from_seed(9, 9))))
                    .diagnostics.empty());
}

TEST(Derive, CyclicGoodDataDrivesAllThreeMachines) {
    Fixture fx;
    fx.derive_apply(frame(kCtl, kDev, connect_request()));
    fx.system = system_state::kDataExchange;
    Derivation in = fx.derive(frame(kDev, kCtl, cyclic(0x8000, kIopsGood)));
    EXPECT_EQ(names(in), (std::vector<std::string>{event::kCyclicDataGood, event::kInputProcessDataSent,
                                                   event::kCyclicDataGood}));
    Derivation out = fx.derive(frame(kCtl, kDev, cyclic(0x8001, kIopsGood)));
    EXPECT_EQ(names(out, FsmKind::Connection), std::vector<std::string>{event::kOutputProcessDataSent});
}

TEST(Derive, CyclicBadIopsIsSilent) {
    Fixture fx;
    fx.derive_apply(frame(kCtl, kDev, connect_request()));
    Derivation d = fx.derive(frame(kDev, kCtl, cyclic(0x8000, kIopsBad)));
    EXPECT_TRUE(d.events.empty());
    EXPECT_TRUE(d.diagnostics.empty());
}

TEST(Derive, CyclicOrphanReportedOnce) {
    Fixture fx;
    Derivation first = fx.derive_apply(frame(kDev, kCtl, cyclic(0x8123, kIopsGood)));
    ASSERT_EQ(first.diagnostics.size(), 1u);
    EXPECT_NE(first.diagnostics[0].message.find("0x8123"), std::string::npos);
    EXPECT_TRUE(fx.derive_apply(frame(kDev, kCtl, cyclic(0x8123, kIopsGood))).diagnostics.empty());
    // Wrong direction for a known route is still an orphan.
    fx.derive_apply(frame(kCtl, kDev, connect_request()));
    EXPECT_EQ(fx.derive(frame(kCtl, kDev, cyclic(0x8000, kIopsGood))).diagnostics.size(), 1u);
}

TEST(Derive, DeferredEventsExpire) {
    Fixture fx;
    fx.derive_apply(frame(kCtl, mac("01:0e:cf:00:00:00"), identify(DcpServiceType::Request, 7, "dev"), 5));
    EXPECT_TRUE(expire_deferred(fx.ctx, 10, 10).empty());
    auto expired = expire_deferred(fx.ctx, 15, 10);
    ASSERT_EQ(expired.size(), 1u);
    EXPECT_EQ(expired[0].event.deferred_name, "dev");
    EXPECT_TRUE(fx.ctx.deferred.empty());
}

TEST(Derive, IsPure) {
    Fixture fx;
    fx.derive_apply(frame(kCtl, kDev, connect_request()));
    auto before_routes = fx.ctx.cyclic_routes;
    auto a = fx.derive(frame(kDev, kCtl, cyclic(0x8999, kIopsGood)));
    auto b = fx.derive(frame(kDev, kCtl, cyclic(0x8999, kIopsGood)));
    EXPECT_EQ(a.diagnostics, b.diagnostics);
    EXPECT_EQ(fx.ctx.cyclic_routes, before_routes);
    EXPECT_TRUE(fx.ctx.reported_orphans.empty());
}

#include <gtest/gtest.h>

#include "poet/encode.hpp"
#include "test_support.hpp"

using namespace poet;
using poet::testing::hex;
using poet::testing::ip;
using poet::testing::mac;

namespace {

ParsedFrame reparse(const LinkHeader& link, const FrameBody& body) {
    auto r = dissect(encode_frame(link, body));
    if (auto* m = std::get_if<MalformedFrame>(&r)) ADD_FAILURE() << m->protocol << ": " << m->reason;
    return std::get<ParsedFrame>(r);
}

const LinkHeader kLink{mac("00:0e:cf:20:00:00"), mac("00:0e:cf:10:00:00"), std::nullopt};

}  // namespace

TEST(Encode, Ipv4ChecksumMatchesReferenceHeader) {
    // Classic worked example header.
    auto h = hex("4500 0073 0000 4000 4011 0000 c0a8 0001 c0a8 00c7");
    EXPECT_EQ(ipv4_header_checksum(h), 0xB861);
}

TEST(Encode, NonCyclicFramesArePaddedToMinimum) {
    ArpPacket a{ArpOperation::Reply, mac("00:0e:cf:20:00:00"), mac("00:0e:cf:10:00:00"), ip("10.0.0.2"), ip("10.0.0.1")};
    auto bytes = encode_frame(kLink, a);
    EXPECT_EQ(bytes.size(), 60u);
    EXPECT_EQ(reparse(kLink, a).body, FrameBody(a));
}

TEST(Encode, CyclicFramesAreNotPadded) {
    PnioCyclicFrame f;
    f.frame_id = 0x8001;
    f.data.assign(40, 0x80);
    auto bytes = encode_frame(LinkHeader{kLink.dst_mac, kLink.src_mac, VlanTag{6, false, 0}}, f);
    EXPECT_EQ(bytes.size(), 14u + 4 + 2 + 40 + 4);
}

TEST(Encode, VlanTagFieldsSurvive) {
    LinkHeader link{kLink.dst_mac, kLink.src_mac, VlanTag{5, true, 0x123}};
    ArpPacket a{ArpOperation::Request, kLink.src_mac, {}, ip("10.0.0.1"), ip("10.0.0.9")};
    auto p = reparse(link, a);
    ASSERT_TRUE(p.envelope.vlan_tag);
    EXPECT_EQ(*p.envelope.vlan_tag, (VlanTag{5, true, 0x123}));
}

TEST(Encode, LldpWithUnknownTlvsRoundTrips) {
    LldpFrame f;
    f.chassis_id = {lldp::kSubtypeMacAddress, {0x00, 0x0e, 0xcf, 0x20, 0x00, 0x00}};
    f.port_id = {lldp::kSubtypeLocal, {'p', '1'}};
    f.ttl_seconds = 120;
    f.port_descriptions = {"uplink", "second"};
    f.other_tlvs = {{6, {'x', 'y'}}, {lldp::kOrganizational, {0x00, 0x80, 0xC2, 0x01, 0x00, 0x01}}};
    f.profinet_tlvs = {{lldp::kProfinetOui, 2, {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}}};
    auto p = reparse({mac("01:80:c2:00:00:0e"), mac("00:0e:cf:20:00:01"), std::nullopt}, f);
    EXPECT_EQ(p.body, FrameBody(f));
    EXPECT_EQ(std::get<LldpFrame>(p.body).chassis_mac(), mac("00:0e:cf:20:00:00"));
}

TEST(Encode, DcpSetRequestWithOddLengthNameRoundTrips) {
    DcpFrame f;
    f.frame_id = frame_id::kDcpGetSet;
    f.service_id = DcpServiceId::Set;
    f.xid = 0xABCDEF01;
    f.blocks = {make_dcp_name_block("abc", 1), make_dcp_ip_block({ip("10.0.0.5"), ip("255.0.0.0"), ip("10.0.0.1")}, 1)};
    auto p = reparse(kLink, f);
    EXPECT_EQ(p.body, FrameBody(f));
}

TEST(Encode, OtherFramesKeepTheirPayload) {
    ParsedFrame frame;
    frame.envelope = {kLink.dst_mac, kLink.src_mac, 0x88B5, std::nullopt, std::vector<std::uint8_t>(46, 0x42)};
    frame.body = OtherFrame{0x88B5, ""};
    auto bytes = encode_frame(frame);
    ASSERT_EQ(bytes.size(), 60u);
    EXPECT_EQ(bytes[12], 0x88);
    EXPECT_EQ(bytes[13], 0xB5);
    EXPECT_EQ(bytes[59], 0x42);
}

TEST(Encode, CmWriteRequestWithRecordDataRoundTrips) {
    CmFrame f;
    f.udp = {ip("192.168.0.1"), ip("192.168.0.10"), 49152, kPnioCmUdpPort, 7, 64};
    f.rpc.object_uuid = Uuid::from_seed(1, 1);
    f.rpc.interface_uuid = rpc::pnio_device_interface();
    f.rpc.activity_uuid = Uuid::from_seed(1, 2);
    f.rpc.opnum = rpc::kOpWrite;
    f.operation = CmOperation::Write;
    f.args_maximum = 1024;
    f.ar_uuid = Uuid::from_seed(1, 3);
    f.record = RecordHeader{3, f.ar_uuid, 0, 1, 1, 0x0100, 5};
    f.record_data = {1, 2, 3, 4, 5};
    auto p = reparse(kLink, f);
    EXPECT_EQ(p.body, FrameBody(f));
}

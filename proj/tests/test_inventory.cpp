#include <gtest/gtest.h>

#include <algorithm>

#include "poet/inventory.hpp"
#include "test_support.hpp"

using namespace poet;
using poet::testing::ip;
using poet::testing::mac;

namespace {

const MacAddress kDev = mac("00:0e:cf:20:00:00");
const MacAddress kCtl = mac("00:0e:cf:10:00:00");

ParsedFrame frame(const MacAddress& src, const MacAddress& dst, FrameBody body, std::uint64_t index = 0) {
    ParsedFrame f;
    f.envelope.src_mac = src;
    f.envelope.dst_mac = dst;
    f.body = std::move(body);
    f.capture_index = index;
    return f;
}

LldpFrame make_lldp(const std::string& name, const std::string& port, std::optional<Ipv4Address> mgmt = std::nullopt) {
    LldpFrame f;
    f.chassis_id = {lldp::kSubtypeLocal, {name.begin(), name.end()}};
    f.port_id = {lldp::kSubtypeLocal, {port.begin(), port.end()}};
    f.ttl_seconds = 20;
    f.station_name = name;
    f.management_address = mgmt;
    f.profinet_tlvs = {make_profinet_chassis_mac_tlv(kDev)};
    return f;
}

DcpFrame identify_response(const std::string& name, Ipv4Address addr) {
    DcpFrame f;
    f.frame_id = frame_id::kDcpIdentifyResponse;
    f.service_type = DcpServiceType::ResponseSuccess;
    f.blocks = {make_dcp_name_block(name, 0), make_dcp_ip_block({addr, ip("255.255.255.0"), {}}, 0)};
    return f;
}

}  // namespace

TEST(Inventory, LldpFromPortsResolvesToInterface) {
    AssetInventory inv;
    inv.update_from_frame(frame(kDev.offset(1), mac("01:80:c2:00:00:0e"), make_lldp("dev-a", "port-001")), {1, 0});
    inv.update_from_frame(frame(kDev.offset(2), mac("01:80:c2:00:00:0e"), make_lldp("dev-a", "port-002"), 1), {2, 0});
    inv.update_from_frame(frame(kDev.offset(1), mac("01:80:c2:00:00:0e"), make_lldp("dev-a", "port-001"), 2), {3, 0});
    ASSERT_EQ(inv.size(), 1u);
    const AssetRecord* r = inv.find(kDev);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->name_of_station, "dev-a");
    EXPECT_EQ(r->port_count, 2u);
    EXPECT_EQ(r->port_macs, (std::set<MacAddress>{kDev.offset(1), kDev.offset(2)}));
    EXPECT_EQ(inv.interface_for(kDev.offset(2)), kDev);
    EXPECT_EQ(inv.interface_for(kDev), kDev);
    EXPECT_FALSE(inv.interface_for(mac("00:11:22:33:44:55")));
    EXPECT_EQ(inv.mac_for_name("dev-a"), kDev);
    EXPECT_EQ(r->first_seen, (Timestamp{1, 0}));
    EXPECT_EQ(r->last_seen, (Timestamp{3, 0}));
    EXPECT_EQ(r->provenance.at("name_of_station").protocol, "LLDP");
}

TEST(Inventory, ArpNeverCreatesRecords) {
    AssetInventory inv;
    ArpPacket a{ArpOperation::Request, kDev, {}, ip("10.0.0.5"), ip("10.0.0.5")};
    EXPECT_TRUE(inv.update_from_frame(frame(kDev, mac("ff:ff:ff:ff:ff:ff"), a), {}).empty());
    EXPECT_EQ(inv.size(), 0u);
}

TEST(Inventory, ArpContributesIpToKnownAsset) {
    AssetInventory inv;
    inv.update_from_frame(frame(kDev.offset(1), mac("01:80:c2:00:00:0e"), make_lldp("dev-a", "port-001")), {});
    ArpPacket a{ArpOperation::Request, kDev, {}, ip("10.0.0.5"), ip("10.0.0.5")};
    inv.update_from_frame(frame(kDev, mac("ff:ff:ff:ff:ff:ff"), a, 4), {});
    EXPECT_EQ(inv.find(kDev)->ip_address, ip("10.0.0.5"));
    EXPECT_EQ(inv.find(kDev)->provenance.at("ip_address").capture_index, 4u);
}

TEST(Inventory, DcpIdentifyResponseMarksDevice) {
    AssetInventory inv;
    inv.update_from_frame(frame(kDev, kCtl, identify_response("dev-a", {})), {});
    const AssetRecord* r = inv.find(kDev);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->role, AssetRole::Device);
    EXPECT_EQ(r->name_of_station, "dev-a");
    EXPECT_FALSE(r->ip_address) << "unassigned address must not be recorded";
}

TEST(Inventory, DcpSetRequestMarksControllerAndTarget) {
    AssetInventory inv;
    DcpFrame set;
    set.frame_id = frame_id::kDcpGetSet;
    set.service_id = DcpServiceId::Set;
    set.blocks = {make_dcp_ip_block({ip("192.168.0.10"), ip("255.255.255.0"), {}}, 1)};
    inv.update_from_frame(frame(kCtl, kDev, set), {});
    EXPECT_EQ(inv.find(kCtl)->role, AssetRole::Controller);
    EXPECT_EQ(inv.find(kDev)->ip_address, ip("192.168.0.10"));
}

TEST(Inventory, ChangedNameIsAConflict) {
    AssetInventory inv;
    inv.update_from_frame(frame(kDev, kCtl, identify_response("dev-a", ip("10.0.0.5"))), {});
    auto changes = inv.update_from_frame(frame(kDev, kCtl, identify_response("ufo", ip("10.0.0.5"))), {});
    auto it = std::find_if(changes.begin(), changes.end(), [](const auto& c) { return c.field == "name_of_station"; });
    ASSERT_NE(it, changes.end());
    EXPECT_TRUE(it->conflict);
    EXPECT_EQ(it->old_value, "dev-a");
    EXPECT_EQ(it->new_value, "ufo");
    EXPECT_EQ(inv.find(kDev)->name_of_station, "ufo");
    EXPECT_FALSE(inv.mac_for_name("dev-a"));
}

TEST(Inventory, RepeatedIdenticalValuesAreNotChanges) {
    AssetInventory inv;
    inv.update_from_frame(frame(kDev, kCtl, identify_response("dev-a", ip("10.0.0.5"))), {});
    auto changes = inv.update_from_frame(frame(kDev, kCtl, identify_response("dev-a", ip("10.0.0.5"))), {});
    EXPECT_TRUE(changes.empty());
}

TEST(Inventory, ExportDocumentRoundTrips) {
    AssetInventory inv;
    inv.update_from_frame(frame(kDev.offset(1), mac("01:80:c2:00:00:0e"), make_lldp("dev-a", "port-001", ip("10.0.0.5"))),
                          {5, 250});
    inv.update_from_frame(frame(kCtl, kDev, identify_response("dev-a", ip("10.0.0.5"))), {6, 0});
    Json doc = inv.export_document();
    ASSERT_TRUE(doc.contains("assets"));
    AssetInventory back = AssetInventory::from_document(doc);
    EXPECT_EQ(back.records(), inv.records());
    EXPECT_EQ(back.export_document(), doc);
    EXPECT_EQ(back.interface_for(kDev.offset(1)), kDev);
}

TEST(Inventory, RoleNamesRoundTrip) {
    for (AssetRole r : {AssetRole::Unknown, AssetRole::Controller, AssetRole::Device, AssetRole::Supervisor})
        EXPECT_EQ(parse_asset_role(to_string(r)), r);
    EXPECT_FALSE(parse_asset_role("router"));
}

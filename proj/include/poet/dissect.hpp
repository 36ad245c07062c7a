#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "poet/capture.hpp"
#include "poet/types.hpp"

namespace poet {

namespace ethertype {
inline constexpr std::uint16_t kIpv4 = 0x0800;
inline constexpr std::uint16_t kArp = 0x0806;
inline constexpr std::uint16_t kVlan = 0x8100;
inline constexpr std::uint16_t kProfinet = 0x8892;
inline constexpr std::uint16_t kLldp = 0x88CC;
}  // namespace ethertype

inline constexpr std::uint16_t kPnioCmUdpPort = 34964;

namespace frame_id {
inline constexpr std::uint16_t kCyclicFirst = 0x8000;
inline constexpr std::uint16_t kCyclicLast = 0xFBFF;
inline constexpr std::uint16_t kAlarmHigh = 0xFC01;
inline constexpr std::uint16_t kAlarmLow = 0xFE01;
inline constexpr std::uint16_t kDcpHello = 0xFEFC;
inline constexpr std::uint16_t kDcpGetSet = 0xFEFD;
inline constexpr std::uint16_t kDcpIdentifyRequest = 0xFEFE;
inline constexpr std::uint16_t kDcpIdentifyResponse = 0xFEFF;

constexpr bool is_dcp(std::uint16_t id) { return id >= kDcpHello && id <= kDcpIdentifyResponse; }
constexpr bool is_cyclic(std::uint16_t id) { return id >= kCyclicFirst && id <= kCyclicLast; }
}  // namespace frame_id

// ---------------------------------------------------------------------------
// Link layer

struct VlanTag {
    std::uint8_t pcp{0};
    bool dei{false};
    std::uint16_t vid{0};
    bool operator==(const VlanTag&) const = default;
};

struct EthernetEnvelope {
    MacAddress dst_mac;
    MacAddress src_mac;
    /// Ethertype after unwrapping at most one 802.1Q tag.
    std::uint16_t ethertype{0};
    std::optional<VlanTag> vlan_tag;
    std::vector<std::uint8_t> payload;
    bool operator==(const EthernetEnvelope&) const = default;
};

// ---------------------------------------------------------------------------
// LLDP

namespace lldp {
inline constexpr std::uint8_t kEnd = 0;
inline constexpr std::uint8_t kChassisId = 1;
inline constexpr std::uint8_t kPortId = 2;
inline constexpr std::uint8_t kTtl = 3;
inline constexpr std::uint8_t kPortDescription = 4;
inline constexpr std::uint8_t kSystemName = 5;
inline constexpr std::uint8_t kManagementAddress = 8;
inline constexpr std::uint8_t kOrganizational = 127;
inline constexpr std::array<std::uint8_t, 3> kProfinetOui{0x00, 0x0E, 0xCF};
inline constexpr std::uint8_t kProfinetChassisMac = 5;
inline constexpr std::uint8_t kSubtypeMacAddress = 4;
inline constexpr std::uint8_t kSubtypeLocal = 7;
}  // namespace lldp

struct LldpId {
    std::uint8_t subtype{0};
    std::vector<std::uint8_t> value;
    std::string as_text() const { return {value.begin(), value.end()}; }
    bool operator==(const LldpId&) const = default;
};

struct LldpTlv {
    std::uint8_t type{0};
    std::vector<std::uint8_t> value;
    bool operator==(const LldpTlv&) const = default;
};

struct LldpOrgTlv {
    std::array<std::uint8_t, 3> oui{};
    std::uint8_t subtype{0};
    std::vector<std::uint8_t> data;
    bool operator==(const LldpOrgTlv&) const = default;
};

struct LldpFrame {
    LldpId chassis_id;
    LldpId port_id;
    std::uint16_t ttl_seconds{0};
    std::optional<std::string> station_name;
    std::vector<std::string> port_descriptions;
    std::optional<Ipv4Address> management_address;
    /// Organizational TLVs carrying the PROFINET OUI.
    std::vector<LldpOrgTlv> profinet_tlvs;
    /// Everything else between TTL and End, kept verbatim.
    std::vector<LldpTlv> other_tlvs;

    /// Interface MAC from the PROFINET chassis-MAC TLV, else a MAC-subtype chassis id.
    std::optional<MacAddress> chassis_mac() const;
    /// Rule violations that do not stop parsing (TTL 0, for instance).
    std::vector<std::string> violations() const;
    bool operator==(const LldpFrame&) const = default;
};

LldpOrgTlv make_profinet_chassis_mac_tlv(const MacAddress& mac);

// ---------------------------------------------------------------------------
// ARP

enum class ArpOperation : std::uint16_t { Request = 1, Reply = 2 };

struct ArpPacket {
    ArpOperation operation{ArpOperation::Request};
    MacAddress sender_mac;
    MacAddress target_mac;
    Ipv4Address sender_ip;
    Ipv4Address target_ip;

    /// Duplicate-address probe/announce shape.
    bool is_gratuitous() const { return sender_ip == target_ip; }
    bool operator==(const ArpPacket&) const = default;
};

// ---------------------------------------------------------------------------
// PN-DCP

enum class DcpServiceId : std::uint8_t { Get = 3, Set = 4, Identify = 5, Hello = 6 };
enum class DcpServiceType : std::uint8_t { Request = 0, ResponseSuccess = 1, ResponseUnsupported = 5 };

namespace dcp {
inline constexpr std::uint8_t kOptionIp = 1;
inline constexpr std::uint8_t kOptionDeviceProperties = 2;
inline constexpr std::uint8_t kOptionControl = 5;
inline constexpr std::uint8_t kOptionAll = 0xFF;
inline constexpr std::uint8_t kSubIpMac = 1;
inline constexpr std::uint8_t kSubIpParameter = 2;
inline constexpr std::uint8_t kSubIpFullSuite = 3;
inline constexpr std::uint8_t kSubNameOfStation = 2;
inline constexpr std::uint8_t kSubDeviceId = 3;
inline constexpr std::uint8_t kSubControlResponse = 4;
}  // namespace dcp

struct DcpBlock {
    std::uint8_t option{0};
    std::uint8_t suboption{0};
    /// BlockQualifier (Set request) or BlockInfo (responses, Hello); absent otherwise.
    std::optional<std::uint16_t> qualifier;
    std::vector<std::uint8_t> data;
    bool operator==(const DcpBlock&) const = default;
};

struct DcpIpParameter {
    Ipv4Address ip;
    Ipv4Address subnet;
    Ipv4Address gateway;
    bool operator==(const DcpIpParameter&) const = default;
};

struct DcpDeviceIdentity {
    std::uint16_t vendor_id{0};
    std::uint16_t device_id{0};
    bool operator==(const DcpDeviceIdentity&) const = default;
};

struct DcpFrame {
    std::uint16_t frame_id{frame_id::kDcpIdentifyRequest};
    DcpServiceId service_id{DcpServiceId::Identify};
    DcpServiceType service_type{DcpServiceType::Request};
    std::uint32_t xid{0};
    std::uint16_t response_delay{0};
    std::vector<DcpBlock> blocks;

    const DcpBlock* find(std::uint8_t option, std::uint8_t suboption) const;
    std::optional<std::string> name_of_station() const;
    std::optional<DcpIpParameter> ip_parameter() const;
    std::optional<DcpDeviceIdentity> device_identity() const;
    /// NameOfStation naming-rule violations; parsing never fails on them.
    std::vector<std::string> violations() const;
    bool operator==(const DcpFrame&) const = default;
};

/// Empty when `name` satisfies the PROFINET NameOfStation rules.
std::vector<std::string> station_name_violations(std::string_view name);

DcpBlock make_dcp_name_block(std::string_view name, std::optional<std::uint16_t> qualifier);
DcpBlock make_dcp_ip_block(const DcpIpParameter& ip, std::optional<std::uint16_t> qualifier);

// ---------------------------------------------------------------------------
// PN-CM (DCE/RPC over UDP)

enum class CmDirection { Request, Response };
enum class CmOperation { Connect, Release, Read, Write, DControl, CControl };

std::string_view to_string(CmOperation op);

namespace rpc {
inline constexpr std::uint8_t kRequest = 0;
inline constexpr std::uint8_t kResponse = 2;
inline constexpr std::uint8_t kFlagLastFragment = 0x02;
inline constexpr std::uint8_t kFlagFragment = 0x04;
inline constexpr std::uint8_t kFlagNoFack = 0x08;
inline constexpr std::uint8_t kFlagIdempotent = 0x20;
inline constexpr std::uint16_t kOpConnect = 0;
inline constexpr std::uint16_t kOpRelease = 1;
inline constexpr std::uint16_t kOpRead = 2;
inline constexpr std::uint16_t kOpWrite = 3;
inline constexpr std::uint16_t kOpControl = 4;
inline constexpr std::uint16_t kOpReadImplicit = 5;
/// DEA00001-6C97-11D1-8271-00A02442DF7D and its controller/supervisor siblings.
Uuid pnio_device_interface();
Uuid pnio_controller_interface();
bool is_pnio_interface(const Uuid& u);
}  // namespace rpc

namespace cm_block {
inline constexpr std::uint16_t kArReq = 0x0101;
inline constexpr std::uint16_t kIocrReq = 0x0102;
inline constexpr std::uint16_t kAlarmCrReq = 0x0103;
inline constexpr std::uint16_t kExpectedSubmoduleReq = 0x0104;
inline constexpr std::uint16_t kWriteReqHeader = 0x0008;
inline constexpr std::uint16_t kReadReqHeader = 0x0009;
inline constexpr std::uint16_t kPrmEndReq = 0x0110;
inline constexpr std::uint16_t kApplicationReadyReq = 0x0112;
inline constexpr std::uint16_t kReleaseReq = 0x0114;
inline constexpr std::uint16_t kArRes = 0x8101;
inline constexpr std::uint16_t kIocrRes = 0x8102;
inline constexpr std::uint16_t kWriteResHeader = 0x8008;
inline constexpr std::uint16_t kReadResHeader = 0x8009;
inline constexpr std::uint16_t kPrmEndRes = 0x8110;
inline constexpr std::uint16_t kApplicationReadyRes = 0x8112;
inline constexpr std::uint16_t kReleaseRes = 0x8114;
}  // namespace cm_block

struct UdpEnvelope {
    Ipv4Address src_ip;
    Ipv4Address dst_ip;
    std::uint16_t src_port{0};
    std::uint16_t dst_port{0};
    std::uint16_t ip_id{0};
    std::uint8_t ttl{64};
    bool operator==(const UdpEnvelope&) const = default;
};

struct RpcHeader {
    std::uint8_t packet_type{rpc::kRequest};
    std::uint8_t flags1{0};
    std::uint8_t flags2{0};
    std::array<std::uint8_t, 3> drep{0x10, 0x00, 0x00};
    Uuid object_uuid;
    Uuid interface_uuid;
    Uuid activity_uuid;
    std::uint32_t server_boot{0};
    std::uint32_t interface_version{1};
    std::uint32_t sequence_number{0};
    std::uint16_t opnum{0};
    std::uint16_t interface_hint{0xFFFF};
    std::uint16_t activity_hint{0xFFFF};

    bool little_endian() const { return (drep[0] & 0xF0) == 0x10; }
    bool operator==(const RpcHeader&) const = default;
};

struct ArBlockRequest {
    std::uint16_t ar_type{1};
    Uuid ar_uuid;
    std::uint16_t session_key{0};
    MacAddress initiator_mac;
    Uuid initiator_object_uuid;
    std::uint32_t ar_properties{0};
    std::uint16_t activity_timeout_factor{600};
    std::uint16_t udp_rt_port{0x8892};
    std::string station_name;
    bool operator==(const ArBlockRequest&) const = default;
};

struct ArBlockResponse {
    std::uint16_t ar_type{1};
    Uuid ar_uuid;
    std::uint16_t session_key{0};
    MacAddress responder_mac;
    std::uint16_t udp_rt_port{0x8892};
    bool operator==(const ArBlockResponse&) const = default;
};

enum class IoCrType : std::uint16_t { Input = 1, Output = 2 };

struct IoDataObject {
    std::uint32_t api{0};
    std::uint16_t slot{0};
    std::uint16_t subslot{0};
    std::uint16_t frame_offset{0};
    bool operator==(const IoDataObject&) const = default;
};

struct IocrDescriptor {
    IoCrType type{IoCrType::Input};
    std::uint16_t reference{1};
    std::uint16_t lt{ethertype::kProfinet};
    std::uint32_t properties{1};
    std::uint16_t data_length{0};
    std::uint16_t frame_id{0};
    std::uint16_t send_clock_factor{32};
    std::uint16_t reduction_ratio{32};
    std::uint16_t phase{1};
    std::uint32_t frame_send_offset{0xFFFFFFFF};
    std::uint16_t watchdog_factor{3};
    std::uint16_t data_hold_factor{3};
    std::uint16_t tag_header{0xC000};
    MacAddress multicast_mac;
    std::vector<IoDataObject> data_objects;
    /// IOCS positions, same {api, slot, subslot, frame_offset} shape.
    std::vector<IoDataObject> iocs_entries;
    bool operator==(const IocrDescriptor&) const = default;
};

struct IocrResponse {
    IoCrType type{IoCrType::Input};
    std::uint16_t reference{1};
    std::uint16_t frame_id{0};
    bool operator==(const IocrResponse&) const = default;
};

enum class DataDirection : std::uint16_t { Input = 1, Output = 2 };

struct DataDescription {
    DataDirection direction{DataDirection::Input};
    std::uint16_t data_length{0};
    std::uint8_t iocs_length{1};
    std::uint8_t iops_length{1};
    bool operator==(const DataDescription&) const = default;
};

struct ExpectedSubmodule {
    std::uint32_t api{0};
    std::uint16_t slot{0};
    std::uint32_t module_id{0};
    std::uint16_t module_properties{0};
    std::uint16_t subslot{0};
    std::uint32_t submodule_id{0};
    /// Bits 0-1: 0 no IO, 1 input, 2 output, 3 input+output.
    std::uint16_t submodule_properties{0};
    std::vector<DataDescription> data_descriptions;
    bool operator==(const ExpectedSubmodule&) const = default;
};

struct RecordHeader {
    std::uint16_t seq_number{0};
    Uuid ar_uuid;
    std::uint32_t api{0};
    std::uint16_t slot{0};
    std::uint16_t subslot{0};
    std::uint16_t index{0};
    std::uint32_t record_length{0};
    bool operator==(const RecordHeader&) const = default;
};

struct ControlBlock {
    std::uint16_t block_type{cm_block::kPrmEndReq};
    Uuid ar_uuid;
    std::uint16_t session_key{0};
    std::uint16_t command{0};
    std::uint16_t properties{0};
    bool operator==(const ControlBlock&) const = default;
};

/// Any PNIO block the dissector does not interpret (AlarmCR, ModuleDiff, ...).
struct CmRawBlock {
    std::uint16_t type{0};
    std::uint8_t version_high{1};
    std::uint8_t version_low{0};
    std::vector<std::uint8_t> body;
    bool operator==(const CmRawBlock&) const = default;
};

struct CmFrame {
    UdpEnvelope udp;
    RpcHeader rpc;
    CmDirection direction{CmDirection::Request};
    CmOperation operation{CmOperation::Connect};
    /// NDR ArgsMaximum (requests only).
    std::uint32_t args_maximum{0};
    /// PNIOStatus (responses only).
    std::array<std::uint8_t, 4> pnio_status{};
    Uuid ar_uuid;
    std::optional<ArBlockRequest> ar_request;
    std::optional<ArBlockResponse> ar_response;
    std::vector<IocrDescriptor> iocr_blocks;
    std::vector<IocrResponse> iocr_responses;
    std::vector<ExpectedSubmodule> expected_submodules;
    std::optional<RecordHeader> record;
    std::vector<std::uint8_t> record_data;
    std::optional<ControlBlock> control;
    std::vector<CmRawBlock> other_blocks;
    bool operator==(const CmFrame&) const = default;
};

// ---------------------------------------------------------------------------
// PNIO cyclic

enum class IopsSummary { Unknown, Good, Bad };

struct PnioCyclicFrame {
    std::uint16_t frame_id{frame_id::kCyclicFirst};
    /// C-SDU including any padding.
    std::vector<std::uint8_t> data;
    std::uint16_t cycle_counter{0};
    std::uint8_t data_status{0x35};
    std::uint8_t transfer_status{0};
    IopsSummary iops_summary{IopsSummary::Unknown};
    bool operator==(const PnioCyclicFrame&) const = default;
};

inline constexpr std::uint8_t kIopsGood = 0x80;
inline constexpr std::uint8_t kIopsBad = 0x00;

// ---------------------------------------------------------------------------

struct OtherFrame {
    std::uint16_t ethertype{0};
    /// Why it was not classified further, e.g. "pn-alarm", "rpc-non-pnio"; empty for plain traffic.
    std::string tag;
    bool operator==(const OtherFrame&) const = default;
};

using FrameBody = std::variant<LldpFrame, ArpPacket, DcpFrame, CmFrame, PnioCyclicFrame, OtherFrame>;

struct ParsedFrame {
    EthernetEnvelope envelope;
    FrameBody body;
    std::uint64_t capture_index{0};

    template <class T>
    const T* as() const { return std::get_if<T>(&body); }
    bool operator==(const ParsedFrame&) const = default;
};

struct MalformedFrame {
    std::string protocol;
    std::size_t offset{0};
    std::string reason;
    std::uint64_t capture_index{0};
    /// Present when the Ethernet header itself was readable.
    std::optional<EthernetEnvelope> envelope;
    bool operator==(const MalformedFrame&) const = default;
};

using DissectResult = std::variant<ParsedFrame, MalformedFrame>;

std::string_view protocol_name(const FrameBody& body);
/// Short one-line description used in provenance records.
std::string summarize(const ParsedFrame& frame);

DissectResult dissect(const RawFrame& raw);
DissectResult dissect(std::span<const std::uint8_t> bytes, std::uint64_t capture_index = 0);

}  // namespace poet

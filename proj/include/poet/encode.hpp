#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "poet/dissect.hpp"

namespace poet {

struct LinkHeader {
    MacAddress dst_mac;
    MacAddress src_mac;
    std::optional<VlanTag> vlan_tag;
};

/// Serializes a frame body the way `dissect` expects to read it back. Non-cyclic frames are
/// zero-padded to the 60-byte Ethernet minimum; cyclic frames are emitted as given.
/// `OtherFrame` bodies carry no payload here; use the ParsedFrame overload to keep one.
std::vector<std::uint8_t> encode_frame(const LinkHeader& link, const FrameBody& body);
/// Uses the envelope's addresses and tag; for `OtherFrame` the envelope payload is emitted.
std::vector<std::uint8_t> encode_frame(const ParsedFrame& frame);

std::vector<std::uint8_t> encode_lldp_payload(const LldpFrame& f);
std::vector<std::uint8_t> encode_arp_payload(const ArpPacket& p);
std::vector<std::uint8_t> encode_dcp_payload(const DcpFrame& f);
/// IPv4 + UDP + DCE/RPC + NDR + PNIO blocks.
std::vector<std::uint8_t> encode_cm_payload(const CmFrame& f);
std::vector<std::uint8_t> encode_pnio_payload(const PnioCyclicFrame& f);

std::uint16_t ipv4_header_checksum(std::span<const std::uint8_t> header);

}  // namespace poet

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "poet/dissect.hpp"

namespace poet {

enum class ValueFormat { U8, U16, U32, Octets };
std::string_view to_string(ValueFormat f);

/// Where one submodule's process data sits inside a cyclic C-SDU.
struct IoDataSpec {
    DataDirection direction{DataDirection::Input};
    std::uint32_t api{0};
    std::uint16_t slot{0};
    std::uint16_t subslot{0};
    /// FrameID and reference of the CR carrying the data.
    std::uint16_t frame_id{0};
    std::uint16_t iocr_reference{0};
    std::uint16_t offset{0};
    std::uint16_t length{0};
    std::uint16_t iops_offset{0};
    std::uint8_t iops_length{1};
    /// Consumer status of this submodule, carried in the opposite CR.
    std::uint16_t iocs_frame_id{0};
    std::uint16_t iocs_offset{0};
    std::uint8_t iocs_length{1};
    ValueFormat format{ValueFormat::Octets};
    bool big_endian{true};
    bool operator==(const IoDataSpec&) const = default;
};

class InconsistentConnect : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SpecOutOfRange : public std::runtime_error {
public:
    SpecOutOfRange(const IoDataSpec& spec, std::size_t data_length);
    const IoDataSpec& spec() const { return spec_; }

private:
    IoDataSpec spec_;
};

/// Per-CR layout bookkeeping kept alongside the specs.
struct CrLayout {
    IoCrType type{IoCrType::Input};
    std::uint16_t frame_id{0};
    std::uint16_t reference{0};
    std::uint16_t declared_length{0};
    /// Data, IOPS and IOCS bytes actually laid out, zero-length submodules included.
    std::uint16_t laid_out_length{0};
    bool operator==(const CrLayout&) const = default;
};

struct IoLayout {
    std::vector<IoDataSpec> specs;
    std::vector<CrLayout> crs;
};

/// Smallest C-SDU a cyclic frame may carry; shorter layouts are padded up to it.
inline constexpr std::uint16_t kMinCsduLength = 40;

/// Lays out each IO CR of a Connect request: for every IO data object in CR order its data then
/// IOPS bytes, followed by the IOCS bytes of the opposite direction's submodules. When a CR lists
/// no objects the expected submodules of its direction are used in declaration order.
/// Throws std::invalid_argument unless `connect` is a Connect request.
IoLayout layout_io(const CmFrame& connect);
/// The specs of `layout_io` for submodules with nonzero data length.
std::vector<IoDataSpec> extract_io_specs(const CmFrame& connect);

/// Replaces request FrameIDs with those assigned in a Connect response, matched by CR reference.
void apply_frame_ids(std::vector<IoDataSpec>& specs, const CmFrame& connect_response);

using ProcessSlice = std::pair<IoDataSpec, std::vector<std::uint8_t>>;
/// Slices for the specs whose FrameID matches the frame; specs of other CRs are skipped.
std::vector<ProcessSlice> extract_process_data(const PnioCyclicFrame& frame, const std::vector<IoDataSpec>& specs);

/// Good when every provider status of a spec for this frame's FrameID is good; Unknown without specs.
IopsSummary evaluate_iops(const PnioCyclicFrame& frame, const std::vector<IoDataSpec>& specs);

/// Big-endian integer interpretation of a slice when its format is numeric.
std::optional<std::uint64_t> decode_value(const IoDataSpec& spec, std::span<const std::uint8_t> bytes);

}  // namespace poet

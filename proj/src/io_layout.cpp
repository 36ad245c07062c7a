#include "poet/io_layout.hpp"

#include <map>
#include <tuple>

namespace poet {

namespace {

using SubmoduleKey = std::tuple<std::uint32_t, std::uint16_t, std::uint16_t>;

std::string where(const IoDataObject& o) {
    return "api " + std::to_string(o.api) + " slot " + std::to_string(o.slot) + " subslot " +
           std::to_string(o.subslot);
}

ValueFormat format_for(std::uint16_t length) {
    switch (length) {
        case 1: return ValueFormat::U8;
        case 2: return ValueFormat::U16;
        case 4: return ValueFormat::U32;
        default: return ValueFormat::Octets;
    }
}

DataDirection opposite(DataDirection d) {
    return d == DataDirection::Input ? DataDirection::Output : DataDirection::Input;
}

}  // namespace

std::string_view to_string(ValueFormat f) {
    switch (f) {
        case ValueFormat::U8: return "u8";
        case ValueFormat::U16: return "u16";
        case ValueFormat::U32: return "u32";
        case ValueFormat::Octets: return "octets";
    }
    return "octets";
}

SpecOutOfRange::SpecOutOfRange(const IoDataSpec& spec, std::size_t data_length)
    : std::runtime_error("spec slot " + std::to_string(spec.slot) + " subslot " + std::to_string(spec.subslot) +
                         " spans " + std::to_string(spec.offset) + "+" + std::to_string(spec.length) +
                         " beyond C-SDU of " + std::to_string(data_length) + " bytes"),
      spec_(spec) {}

IoLayout layout_io(const CmFrame& connect) {
    if (connect.operation != CmOperation::Connect || connect.direction != CmDirection::Request)
        throw std::invalid_argument("IO layout requires a Connect request");

    std::map<SubmoduleKey, const ExpectedSubmodule*> submodules;
    for (const auto& sm : connect.expected_submodules) submodules.emplace(SubmoduleKey{sm.api, sm.slot, sm.subslot}, &sm);

    auto description = [&](const IoDataObject& o, DataDirection dir) -> const DataDescription* {
        auto it = submodules.find({o.api, o.slot, o.subslot});
        if (it == submodules.end()) return nullptr;
        for (const auto& d : it->second->data_descriptions)
            if (d.direction == dir) return &d;
        return nullptr;
    };
    auto derived_objects = [&](DataDirection dir) {
        std::vector<IoDataObject> out;
        for (const auto& sm : connect.expected_submodules)
            for (const auto& d : sm.data_descriptions)
                if (d.direction == dir) out.push_back({sm.api, sm.slot, sm.subslot, 0});
        return out;
    };

    IoLayout layout;
    std::map<std::tuple<std::uint32_t, std::uint16_t, std::uint16_t, DataDirection>, std::pair<std::uint16_t, std::uint16_t>>
        iocs_at;

    for (const auto& cr : connect.iocr_blocks) {
        DataDirection dir = cr.type == IoCrType::Input ? DataDirection::Input : DataDirection::Output;
        bool explicit_objects = !cr.data_objects.empty() || !cr.iocs_entries.empty();
        auto objects = explicit_objects ? cr.data_objects : derived_objects(dir);
        auto consumers = explicit_objects ? cr.iocs_entries : derived_objects(opposite(dir));
        std::uint32_t pos = 0;

        for (const auto& o : objects) {
            const DataDescription* d = description(o, dir);
            if (!d)
                throw InconsistentConnect("IOCR " + std::to_string(cr.reference) + " references " + where(o) +
                                          " with no matching expected submodule description");
            if (explicit_objects && o.frame_offset != pos)
                throw InconsistentConnect("IO data object " + where(o) + " declares frame offset " +
                                          std::to_string(o.frame_offset) + ", layout gives " + std::to_string(pos));
            if (d->data_length > 0) {
                IoDataSpec s;
                s.direction = dir;
                s.api = o.api;
                s.slot = o.slot;
                s.subslot = o.subslot;
                s.frame_id = cr.frame_id;
                s.iocr_reference = cr.reference;
                s.offset = static_cast<std::uint16_t>(pos);
                s.length = d->data_length;
                s.iops_offset = static_cast<std::uint16_t>(pos + d->data_length);
                s.iops_length = d->iops_length;
                s.iocs_length = d->iocs_length;
                s.format = format_for(d->data_length);
                layout.specs.push_back(s);
            }
            pos += d->data_length + d->iops_length;
        }
        for (const auto& o : consumers) {
            const DataDescription* d = description(o, opposite(dir));
            if (!d) d = description(o, dir);
            if (!d)
                throw InconsistentConnect("IOCS entry " + where(o) + " has no expected submodule");
            if (explicit_objects && o.frame_offset != pos)
                throw InconsistentConnect("IOCS entry " + where(o) + " declares frame offset " +
                                          std::to_string(o.frame_offset) + ", layout gives " + std::to_string(pos));
            iocs_at[{o.api, o.slot, o.subslot, opposite(dir)}] = {cr.frame_id, static_cast<std::uint16_t>(pos)};
            pos += d->iocs_length;
        }

        bool padded = pos < kMinCsduLength && cr.data_length == kMinCsduLength;
        if (cr.data_length != pos && !padded)
            throw InconsistentConnect("IOCR " + std::to_string(cr.reference) + " declares data length " +
                                      std::to_string(cr.data_length) + " but submodules lay out " +
                                      std::to_string(pos) + " bytes");
        layout.crs.push_back({cr.type, cr.frame_id, cr.reference, cr.data_length, static_cast<std::uint16_t>(pos)});
    }

    for (auto& s : layout.specs) {
        auto it = iocs_at.find({s.api, s.slot, s.subslot, s.direction});
        if (it != iocs_at.end()) {
            s.iocs_frame_id = it->second.first;
            s.iocs_offset = it->second.second;
        }
    }
    return layout;
}

std::vector<IoDataSpec> extract_io_specs(const CmFrame& connect) { return layout_io(connect).specs; }

void apply_frame_ids(std::vector<IoDataSpec>& specs, const CmFrame& connect_response) {
    std::map<std::uint16_t, std::uint16_t> assigned;
    std::map<std::uint16_t, std::uint16_t> renamed;
    for (const auto& r : connect_response.iocr_responses) assigned[r.reference] = r.frame_id;
    for (auto& s : specs) {
        auto it = assigned.find(s.iocr_reference);
        if (it == assigned.end()) continue;
        renamed[s.frame_id] = it->second;
        s.frame_id = it->second;
    }
    for (auto& s : specs) {
        auto it = renamed.find(s.iocs_frame_id);
        if (it != renamed.end()) s.iocs_frame_id = it->second;
    }
}

std::vector<ProcessSlice> extract_process_data(const PnioCyclicFrame& frame, const std::vector<IoDataSpec>& specs) {
    std::vector<ProcessSlice> out;
    out.reserve(specs.size());
    for (const auto& s : specs) {
        if (s.frame_id != frame.frame_id) continue;
        std::size_t end = static_cast<std::size_t>(s.offset) + s.length;
        if (end > frame.data.size()) throw SpecOutOfRange(s, frame.data.size());
        out.emplace_back(s, std::vector<std::uint8_t>(frame.data.begin() + s.offset, frame.data.begin() + end));
    }
    return out;
}

IopsSummary evaluate_iops(const PnioCyclicFrame& frame, const std::vector<IoDataSpec>& specs) {
    bool any = false;
    for (const auto& s : specs) {
        if (s.frame_id != frame.frame_id) continue;
        any = true;
        if (s.iops_length == 0) continue;
        if (s.iops_offset >= frame.data.size()) return IopsSummary::Bad;
        if ((frame.data[s.iops_offset] & kIopsGood) == 0) return IopsSummary::Bad;
    }
    return any ? IopsSummary::Good : IopsSummary::Unknown;
}

std::optional<std::uint64_t> decode_value(const IoDataSpec& spec, std::span<const std::uint8_t> bytes) {
    if (spec.format == ValueFormat::Octets || bytes.empty() || bytes.size() > 8) return std::nullopt;
    std::uint64_t v = 0;
    if (spec.big_endian) {
        for (auto b : bytes) v = v << 8 | b;
    } else {
        for (std::size_t i = bytes.size(); i-- > 0;) v = v << 8 | bytes[i];
    }
    return v;
}

}  // namespace poet

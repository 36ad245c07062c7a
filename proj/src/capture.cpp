#include "poet/capture.hpp"

#include <fstream>
#include <iterator>

#include "poet/bytes.hpp"

namespace poet {

namespace {

constexpr std::uint32_t kPcapMagicMicro = 0xA1B2C3D4;
constexpr std::uint32_t kPcapMagicNano = 0xA1B23C4D;
constexpr std::uint32_t kPcapMagicMicroSwapped = 0xD4C3B2A1;
constexpr std::uint32_t kPcapMagicNanoSwapped = 0x4D3CB2A1;
constexpr std::uint32_t kPcapngSectionHeader = 0x0A0D0D0A;
constexpr std::uint32_t kPcapngByteOrderMagic = 0x1A2B3C4D;
constexpr std::uint32_t kPcapngInterfaceDescription = 0x00000001;
constexpr std::uint32_t kPcapngEnhancedPacket = 0x00000006;
constexpr std::uint16_t kLinkTypeEthernet = 1;
constexpr std::size_t kPcapGlobalHeader = 24;
constexpr std::size_t kPcapRecordHeader = 16;

std::uint32_t bswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xFF00) | ((v << 8) & 0xFF0000) | (v << 24);
}

}  // namespace

std::string_view to_string(CaptureError::Kind kind) {
    switch (kind) {
        case CaptureError::Kind::Unreadable: return "Unreadable";
        case CaptureError::Kind::UnknownMagic: return "UnknownMagic";
        case CaptureError::Kind::UnsupportedLinkType: return "UnsupportedLinkType";
        case CaptureError::Kind::TruncatedRecord: return "TruncatedRecord";
        case CaptureError::Kind::BadBlock: return "BadBlock";
    }
    return "Unknown";
}

std::string CaptureError::describe() const {
    return std::string(to_string(kind)) + " at byte " + std::to_string(byte_offset) + ": " + message;
}

CaptureReader::CaptureReader(std::vector<std::uint8_t> image, std::string source_id)
    : image_(std::move(image)), source_id_(std::move(source_id)) {
    parse_global_header();
}

CaptureReader CaptureReader::open(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CaptureOpenError({CaptureError::Kind::Unreadable, 0, "cannot open " + path.string()});
    std::vector<std::uint8_t> image((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw CaptureOpenError({CaptureError::Kind::Unreadable, 0, "read failed: " + path.string()});
    return CaptureReader(std::move(image), path.filename().string());
}

CaptureReader CaptureReader::from_bytes(std::vector<std::uint8_t> image, std::string source_id) {
    return CaptureReader(std::move(image), std::move(source_id));
}

std::uint32_t CaptureReader::rd32(std::size_t at) const {
    std::uint32_t v = static_cast<std::uint32_t>(image_[at]) | static_cast<std::uint32_t>(image_[at + 1]) << 8 |
                      static_cast<std::uint32_t>(image_[at + 2]) << 16 |
                      static_cast<std::uint32_t>(image_[at + 3]) << 24;
    return swapped_ ? bswap32(v) : v;
}

std::uint16_t CaptureReader::rd16(std::size_t at) const {
    std::uint16_t v = static_cast<std::uint16_t>(image_[at] | image_[at + 1] << 8);
    return swapped_ ? static_cast<std::uint16_t>(v >> 8 | v << 8) : v;
}

void CaptureReader::parse_global_header() {
    if (image_.size() < 4)
        throw CaptureOpenError({CaptureError::Kind::UnknownMagic, 0, "file shorter than a magic number"});
    swapped_ = false;
    std::uint32_t magic = rd32(0);
    if (magic == kPcapngSectionHeader) {
        format_ = Format::PcapNg;
        if (!read_section_header(0))
            throw CaptureOpenError({CaptureError::Kind::UnknownMagic, 8, "bad pcapng byte-order magic"});
        return;
    }
    switch (magic) {
        case kPcapMagicMicro: break;
        case kPcapMagicNano: nanosecond_ = true; break;
        case kPcapMagicMicroSwapped: swapped_ = true; break;
        case kPcapMagicNanoSwapped: swapped_ = nanosecond_ = true; break;
        default: {
            char buf[16];
            std::snprintf(buf, sizeof buf, "0x%08X", magic);
            throw CaptureOpenError({CaptureError::Kind::UnknownMagic, 0, std::string("unknown magic ") + buf});
        }
    }
    format_ = Format::Pcap;
    if (image_.size() < kPcapGlobalHeader)
        throw CaptureOpenError({CaptureError::Kind::TruncatedRecord, 0, "pcap global header truncated"});
    link_type_ = rd32(20);
    if (link_type_ != kLinkTypeEthernet)
        throw CaptureOpenError({CaptureError::Kind::UnsupportedLinkType, 20,
                                "link type " + std::to_string(link_type_) + " is not Ethernet"});
    offset_ = kPcapGlobalHeader;
}

bool CaptureReader::read_section_header(std::size_t at) {
    if (image_.size() < at + 12) return false;
    swapped_ = false;
    std::uint32_t bom = rd32(at + 8);
    if (bom == kPcapngByteOrderMagic) {
        swapped_ = false;
    } else if (bom == bswap32(kPcapngByteOrderMagic)) {
        swapped_ = true;
    } else {
        return false;
    }
    interfaces_.clear();
    offset_ = at;
    return true;
}

void CaptureReader::read_interface_block(std::size_t body, std::size_t body_len) {
    Interface iface;
    if (body_len >= 8) {
        iface.link_type = rd16(body);
        std::size_t opt = body + 8;
        std::size_t end = body + body_len;
        while (opt + 4 <= end) {
            std::uint16_t code = rd16(opt);
            std::uint16_t len = rd16(opt + 2);
            if (code == 0) break;
            if (opt + 4 + len > end) break;
            if (code == 9 && len >= 1) {
                std::uint8_t res = image_[opt + 4];
                std::uint64_t ticks = 1;
                if (res & 0x80) {
                    unsigned exp = res & 0x7F;
                    ticks = exp < 63 ? (1ULL << exp) : 1ULL << 62;
                } else {
                    for (unsigned i = 0; i < res && i < 19; ++i) ticks *= 10;
                }
                iface.ticks_per_second = ticks;
            }
            opt += 4 + ((len + 3u) & ~3u);
        }
    }
    interfaces_.push_back(iface);
}

void CaptureReader::stop(CaptureError::Kind kind, std::uint64_t offset, std::string message) {
    done_ = true;
    error_ = CaptureError{kind, offset, std::move(message)};
}

std::optional<RawFrame> CaptureReader::accept(Timestamp ts, std::span<const std::uint8_t> bytes) {
    std::uint64_t index = record_index_++;
    if (bytes.size() < kMinFrameBytes) {
        ++rejected_;
        return std::nullopt;
    }
    return RawFrame{ts, {bytes.begin(), bytes.end()}, index, source_id_};
}

std::optional<RawFrame> CaptureReader::next() {
    while (!done_) {
        std::optional<RawFrame> frame = format_ == Format::Pcap ? next_pcap() : next_pcapng();
        if (frame) return frame;
    }
    return std::nullopt;
}

std::optional<RawFrame> CaptureReader::next_pcap() {
    if (offset_ == image_.size()) {
        done_ = true;
        return std::nullopt;
    }
    if (image_.size() - offset_ < kPcapRecordHeader) {
        stop(CaptureError::Kind::TruncatedRecord, offset_, "record header truncated");
        return std::nullopt;
    }
    std::uint32_t ts_sec = rd32(offset_);
    std::uint32_t ts_frac = rd32(offset_ + 4);
    std::uint32_t incl = rd32(offset_ + 8);
    std::size_t data = offset_ + kPcapRecordHeader;
    if (image_.size() - data < incl) {
        stop(CaptureError::Kind::TruncatedRecord, offset_,
             "record claims " + std::to_string(incl) + " bytes, " + std::to_string(image_.size() - data) +
                 " remain");
        return std::nullopt;
    }
    Timestamp ts{static_cast<std::int64_t>(ts_sec), nanosecond_ ? ts_frac : ts_frac * 1000u};
    if (ts.nanoseconds >= 1'000'000'000) ts = Timestamp::from_nanoseconds(ts.total_nanoseconds());
    offset_ = data + incl;
    return accept(ts, std::span<const std::uint8_t>(image_).subspan(data, incl));
}

std::optional<RawFrame> CaptureReader::next_pcapng() {
    if (offset_ == image_.size()) {
        done_ = true;
        return std::nullopt;
    }
    if (image_.size() - offset_ < 12) {
        stop(CaptureError::Kind::TruncatedRecord, offset_, "block header truncated");
        return std::nullopt;
    }
    std::size_t block = offset_;
    // A new section may switch byte order; the type is palindromic.
    if (rd32(block) == kPcapngSectionHeader) {
        if (!read_section_header(block)) {
            stop(CaptureError::Kind::BadBlock, block + 8, "bad section byte-order magic");
            return std::nullopt;
        }
    }
    std::uint32_t type = rd32(block);
    std::uint32_t total = rd32(block + 4);
    if (total < 12 || total % 4 != 0) {
        stop(CaptureError::Kind::BadBlock, block, "invalid block length " + std::to_string(total));
        return std::nullopt;
    }
    if (image_.size() - block < total) {
        stop(CaptureError::Kind::TruncatedRecord, block,
             "block claims " + std::to_string(total) + " bytes, " + std::to_string(image_.size() - block) +
                 " remain");
        return std::nullopt;
    }
    offset_ = block + total;
    std::size_t body = block + 8;
    std::size_t body_len = total - 12;
    if (type == kPcapngInterfaceDescription) {
        read_interface_block(body, body_len);
        return std::nullopt;
    }
    if (type != kPcapngEnhancedPacket) return std::nullopt;
    if (body_len < 20) {
        stop(CaptureError::Kind::BadBlock, block, "enhanced packet block too short");
        return std::nullopt;
    }
    std::uint32_t iface_id = rd32(body);
    std::uint64_t ticks = static_cast<std::uint64_t>(rd32(body + 4)) << 32 | rd32(body + 8);
    std::uint32_t cap_len = rd32(body + 12);
    if (cap_len > body_len - 20) {
        stop(CaptureError::Kind::TruncatedRecord, block, "packet data exceeds block");
        return std::nullopt;
    }
    Interface iface = iface_id < interfaces_.size() ? interfaces_[iface_id] : Interface{};
    if (iface.link_type != kLinkTypeEthernet) {
        ++record_index_;
        return std::nullopt;
    }
    std::uint64_t tps = iface.ticks_per_second;
    std::uint64_t secs = ticks / tps;
    std::uint64_t frac = ticks % tps;
    auto ns = static_cast<std::uint32_t>(static_cast<unsigned __int128>(frac) * 1'000'000'000u / tps);
    Timestamp ts{static_cast<std::int64_t>(secs), ns};
    return accept(ts, std::span<const std::uint8_t>(image_).subspan(body + 20, cap_len));
}

std::optional<RawFrame> MemoryFrameSource::next() {
    if (pos_ >= frames_.size()) return std::nullopt;
    return frames_[pos_++];
}

void CaptureStats::add(const RawFrame& frame) {
    ++frames;
    bytes += frame.bytes.size();
    if (!first_) first_ = frame.timestamp;
    span_ns = frame.timestamp.total_nanoseconds() - first_->total_nanoseconds();
}

CaptureStats frame_stream_stats(FrameSource& source) {
    CaptureStats stats;
    while (auto frame = source.next()) stats.add(*frame);
    return stats;
}

CaptureStats frame_stream_stats(std::span<const RawFrame> frames) {
    CaptureStats stats;
    for (const auto& f : frames) stats.add(f);
    return stats;
}

std::vector<std::uint8_t> encode_pcap(std::span<const RawFrame> frames, PcapWriteOptions options) {
    ByteWriter w;
    bool le = !options.big_endian;
    w.u32(options.nanosecond ? kPcapMagicNano : kPcapMagicMicro, le);
    w.u16(2, le);
    w.u16(4, le);
    w.u32(0, le);
    w.u32(0, le);
    w.u32(options.snaplen, le);
    w.u32(kLinkTypeEthernet, le);
    for (const auto& f : frames) {
        w.u32(static_cast<std::uint32_t>(f.timestamp.seconds), le);
        w.u32(options.nanosecond ? f.timestamp.nanoseconds : f.timestamp.nanoseconds / 1000u, le);
        w.u32(static_cast<std::uint32_t>(f.bytes.size()), le);
        w.u32(static_cast<std::uint32_t>(f.bytes.size()), le);
        w.bytes(f.bytes);
    }
    return w.take();
}

std::vector<std::uint8_t> encode_pcapng(std::span<const RawFrame> frames, bool nanosecond) {
    ByteWriter w;
    // Section header block.
    w.u32_le(kPcapngSectionHeader);
    w.u32_le(28);
    w.u32_le(kPcapngByteOrderMagic);
    w.u16_le(1);
    w.u16_le(0);
    w.u32_le(0xFFFFFFFF);
    w.u32_le(0xFFFFFFFF);
    w.u32_le(28);
    // Interface description block.
    std::uint32_t idb_len = nanosecond ? 32 : 20;
    w.u32_le(kPcapngInterfaceDescription);
    w.u32_le(idb_len);
    w.u16_le(kLinkTypeEthernet);
    w.u16_le(0);
    w.u32_le(0);
    if (nanosecond) {
        w.u16_le(9);
        w.u16_le(1);
        w.u8(9);
        w.zeros(3);
        w.u16_le(0);
        w.u16_le(0);
    }
    w.u32_le(idb_len);
    std::uint64_t tps = nanosecond ? 1'000'000'000ULL : 1'000'000ULL;
    for (const auto& f : frames) {
        std::size_t padded = (f.bytes.size() + 3) & ~std::size_t{3};
        auto total = static_cast<std::uint32_t>(32 + padded);
        std::uint64_t ticks = static_cast<std::uint64_t>(f.timestamp.seconds) * tps +
                              (nanosecond ? f.timestamp.nanoseconds : f.timestamp.nanoseconds / 1000u);
        w.u32_le(kPcapngEnhancedPacket);
        w.u32_le(total);
        w.u32_le(0);
        w.u32_le(static_cast<std::uint32_t>(ticks >> 32));
        w.u32_le(static_cast<std::uint32_t>(ticks));
        w.u32_le(static_cast<std::uint32_t>(f.bytes.size()));
        w.u32_le(static_cast<std::uint32_t>(f.bytes.size()));
        w.bytes(f.bytes);
        w.zeros(padded - f.bytes.size());
        w.u32_le(total);
    }
    return w.take();
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> image) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace poet

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "poet/types.hpp"

namespace poet {

/// One captured Ethernet frame. `bytes` is always at least 14 long.
struct RawFrame {
    Timestamp timestamp;
    std::vector<std::uint8_t> bytes;
    std::uint64_t capture_index{0};
    std::string source_id;

    bool operator==(const RawFrame&) const = default;
};

inline constexpr std::size_t kMinFrameBytes = 14;

struct CaptureError {
    enum class Kind { Unreadable, UnknownMagic, UnsupportedLinkType, TruncatedRecord, BadBlock };
    Kind kind{Kind::Unreadable};
    std::uint64_t byte_offset{0};
    std::string message;

    std::string describe() const;
};

std::string_view to_string(CaptureError::Kind kind);

/// Thrown when a capture cannot be opened at all (unreadable, bad magic).
class CaptureOpenError : public std::runtime_error {
public:
    explicit CaptureOpenError(CaptureError err)
        : std::runtime_error(err.describe()), error_(std::move(err)) {}
    const CaptureError& error() const { return error_; }

private:
    CaptureError error_;
};

/// Single-consumer frame stream. `next()` returns frames in capture order until the end of
/// the source or the first unrecoverable record error, after which `error()` is set.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual std::optional<RawFrame> next() = 0;
    virtual const std::optional<CaptureError>& error() const = 0;
    /// Records dropped at ingestion for being shorter than an Ethernet header.
    virtual std::uint64_t rejected_short_frames() const = 0;
};

/// pcap (µs/ns, either byte order) and pcapng (EPB only) reader over an in-memory image.
class CaptureReader final : public FrameSource {
public:
    static CaptureReader open(const std::filesystem::path& path);
    static CaptureReader from_bytes(std::vector<std::uint8_t> image, std::string source_id = "memory");

    std::optional<RawFrame> next() override;
    const std::optional<CaptureError>& error() const override { return error_; }
    std::uint64_t rejected_short_frames() const override { return rejected_; }

    enum class Format { Pcap, PcapNg };
    Format format() const { return format_; }

private:
    struct Interface {
        std::uint16_t link_type{1};
        std::uint64_t ticks_per_second{1'000'000};
    };

    CaptureReader(std::vector<std::uint8_t> image, std::string source_id);
    void parse_global_header();
    std::optional<RawFrame> next_pcap();
    std::optional<RawFrame> next_pcapng();
    bool read_section_header(std::size_t at);
    void read_interface_block(std::size_t body, std::size_t body_len);
    std::uint32_t rd32(std::size_t at) const;
    std::uint16_t rd16(std::size_t at) const;
    std::optional<RawFrame> accept(Timestamp ts, std::span<const std::uint8_t> bytes);
    void stop(CaptureError::Kind kind, std::uint64_t offset, std::string message);

    std::vector<std::uint8_t> image_;
    std::string source_id_;
    Format format_{Format::Pcap};
    bool swapped_{false};
    bool nanosecond_{false};
    std::uint32_t link_type_{1};
    std::vector<Interface> interfaces_;
    std::size_t offset_{0};
    std::uint64_t record_index_{0};
    std::uint64_t rejected_{0};
    bool done_{false};
    std::optional<CaptureError> error_;
};

/// Frames held in memory; used by tests and the synthesizer.
class MemoryFrameSource final : public FrameSource {
public:
    explicit MemoryFrameSource(std::vector<RawFrame> frames) : frames_(std::move(frames)) {}
    std::optional<RawFrame> next() override;
    const std::optional<CaptureError>& error() const override { return error_; }
    std::uint64_t rejected_short_frames() const override { return 0; }

private:
    std::vector<RawFrame> frames_;
    std::size_t pos_{0};
    std::optional<CaptureError> error_;
};

struct CaptureStats {
    std::uint64_t frames{0};
    std::uint64_t bytes{0};
    /// last timestamp minus first, in nanoseconds; zero for fewer than two frames.
    std::int64_t span_ns{0};

    double span_seconds() const { return static_cast<double>(span_ns) * 1e-9; }
    void add(const RawFrame& frame);
    bool operator==(const CaptureStats&) const = default;

private:
    std::optional<Timestamp> first_;
};

/// Drains the stream.
CaptureStats frame_stream_stats(FrameSource& source);
CaptureStats frame_stream_stats(std::span<const RawFrame> frames);

struct PcapWriteOptions {
    bool nanosecond{false};
    bool big_endian{false};
    std::uint32_t snaplen{65535};
};

std::vector<std::uint8_t> encode_pcap(std::span<const RawFrame> frames, PcapWriteOptions options = {});
/// Single section, single Ethernet interface; if_tsresol is written when `nanosecond`.
std::vector<std::uint8_t> encode_pcapng(std::span<const RawFrame> frames, bool nanosecond = false);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> image);

}  // namespace poet

#include <gtest/gtest.h>

#include "poet/capture.hpp"
#include "test_support.hpp"

using namespace poet;
using poet::testing::hex;

namespace {

std::vector<std::uint8_t> ethernet_min() { return hex("ffffffffffff 000ecf000001 0806") ; }

std::vector<RawFrame> drain(CaptureReader& r) {
    std::vector<RawFrame> out;
    while (auto f = r.next()) out.push_back(*f);
    return out;
}

}  // namespace

TEST(CaptureIngest, ReadsLittleEndianMicrosecondPcap) {
    auto image = hex(
        "d4c3b2a1 0200 0400 00000000 00000000 ffff0000 01000000"
        "00f15365 40e20100 0e000000 0e000000"
        "ffffffffffff000ecf0000010806");
    auto r = CaptureReader::from_bytes(image);
    auto frames = drain(r);
    ASSERT_EQ(frames.size(), 1u);
    EXPECT_EQ(frames[0].timestamp.seconds, 1700000000);
    EXPECT_EQ(frames[0].timestamp.nanoseconds, 123456000u);
    EXPECT_EQ(frames[0].bytes, ethernet_min());
    EXPECT_EQ(frames[0].capture_index, 0u);
    EXPECT_FALSE(r.error());
    EXPECT_EQ(r.format(), CaptureReader::Format::Pcap);
}

TEST(CaptureIngest, ReadsBigEndianNanosecondPcap) {
    auto image = hex(
        "a1b23c4d 0002 0004 00000000 00000000 0000ffff 00000001"
        "6553f100 00000007 0000000e 0000000e"
        "ffffffffffff000ecf0000010806");
    auto r = CaptureReader::from_bytes(image);
    auto frames = drain(r);
    ASSERT_EQ(frames.size(), 1u);
    EXPECT_EQ(frames[0].timestamp.nanoseconds, 7u);
}

TEST(CaptureIngest, ReadsPcapngWithNanosecondResolution) {
    auto image = hex(
        // SHB
        "0a0d0d0a 1c000000 4d3c2b1a 0100 0000 ffffffff ffffffff 1c000000"
        // IDB with if_tsresol = 9
        "01000000 20000000 0100 0000 00000000 0900 0100 09000000 0000 0000 20000000"
        // EPB, ticks = 1700000000000000005, 14 bytes captured
        "06000000 30000000 00000000 fe9c9717 05002a36 0e000000 0e000000"
        "ffffffffffff000ecf0000010806 0000 30000000");
    auto r = CaptureReader::from_bytes(image);
    auto frames = drain(r);
    ASSERT_EQ(frames.size(), 1u) << (r.error() ? r.error()->describe() : "");
    EXPECT_EQ(r.format(), CaptureReader::Format::PcapNg);
    EXPECT_EQ(frames[0].timestamp.seconds, 1700000000);
    EXPECT_EQ(frames[0].timestamp.nanoseconds, 5u);
    EXPECT_EQ(frames[0].bytes, ethernet_min());
}

TEST(CaptureIngest, UnknownMagicFailsToOpen) {
    try {
        CaptureReader::from_bytes(hex("deadbeef00000000"));
        FAIL() << "expected CaptureOpenError";
    } catch (const CaptureOpenError& e) {
        EXPECT_EQ(e.error().kind, CaptureError::Kind::UnknownMagic);
    }
}

TEST(CaptureIngest, NonEthernetLinkTypeIsRejected) {
    auto image = hex("d4c3b2a1 0200 0400 00000000 00000000 ffff0000 69000000");
    EXPECT_THROW(CaptureReader::from_bytes(image), CaptureOpenError);
}

TEST(CaptureIngest, MissingFileFailsToOpen) {
    EXPECT_THROW(CaptureReader::open("/nonexistent/capture.pcap"), CaptureOpenError);
}

TEST(CaptureIngest, TruncatedRecordKeepsEarlierFrames) {
    std::vector<RawFrame> in{poet::testing::raw(ethernet_min(), 0), poet::testing::raw(ethernet_min(), 1)};
    auto image = encode_pcap(in);
    image.resize(image.size() - 3);
    auto r = CaptureReader::from_bytes(image);
    auto frames = drain(r);
    EXPECT_EQ(frames.size(), 1u);
    ASSERT_TRUE(r.error());
    EXPECT_EQ(r.error()->kind, CaptureError::Kind::TruncatedRecord);
}

TEST(CaptureIngest, ShortRecordsAreCountedNotYielded) {
    std::vector<RawFrame> in{poet::testing::raw(hex("0102030405"), 0), poet::testing::raw(ethernet_min(), 1)};
    auto r = CaptureReader::from_bytes(encode_pcap(in));
    auto frames = drain(r);
    ASSERT_EQ(frames.size(), 1u);
    EXPECT_EQ(frames[0].capture_index, 1u);
    EXPECT_EQ(r.rejected_short_frames(), 1u);
}

TEST(CaptureIngest, EmptyPcapYieldsNothing) {
    auto r = CaptureReader::from_bytes(encode_pcap({}));
    EXPECT_FALSE(r.next());
    EXPECT_FALSE(r.error());
}

TEST(CaptureIngest, WriterReaderRoundTripAllFormats) {
    std::vector<RawFrame> in;
    for (int i = 0; i < 5; ++i) {
        auto b = ethernet_min();
        b.push_back(static_cast<std::uint8_t>(i));
        in.push_back(poet::testing::raw(b, static_cast<std::uint64_t>(i),
                                        Timestamp{1700000000 + i, static_cast<std::uint32_t>(i * 1000 + 1)}));
    }
    auto expect_same = [&](const std::vector<std::uint8_t>& image, bool ns) {
        auto r = CaptureReader::from_bytes(image);
        auto out = drain(r);
        ASSERT_EQ(out.size(), in.size());
        for (std::size_t i = 0; i < in.size(); ++i) {
            EXPECT_EQ(out[i].bytes, in[i].bytes);
            EXPECT_EQ(out[i].capture_index, i);
            auto want = in[i].timestamp.nanoseconds;
            if (!ns) want -= want % 1000;
            EXPECT_EQ(out[i].timestamp.nanoseconds, want);
        }
    };
    expect_same(encode_pcap(in), false);
    expect_same(encode_pcap(in, {true, false, 65535}), true);
    expect_same(encode_pcap(in, {false, true, 65535}), false);
    expect_same(encode_pcapng(in, false), false);
    expect_same(encode_pcapng(in, true), true);
}

TEST(CaptureIngest, StatsCoverFramesBytesAndSpan) {
    std::vector<RawFrame> in{poet::testing::raw(ethernet_min(), 0, {10, 0}),
                             poet::testing::raw(ethernet_min(), 1, {12, 500})};
    CaptureStats s = frame_stream_stats(in);
    EXPECT_EQ(s.frames, 2u);
    EXPECT_EQ(s.bytes, 28u);
    EXPECT_EQ(s.span_ns, 2'000'000'500);
    MemoryFrameSource src(in);
    EXPECT_EQ(frame_stream_stats(src), s);
}

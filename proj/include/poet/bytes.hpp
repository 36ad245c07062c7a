#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "poet/types.hpp"

namespace poet {

/// Raised by ByteReader when a read would run past the end of its window.
/// `offset` is absolute within the enclosing frame.
class DecodeError : public std::runtime_error {
public:
    DecodeError(std::size_t offset, const std::string& reason)
        : std::runtime_error(reason), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Bounds-checked cursor over a byte window. All reads are big-endian unless suffixed `_le`.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data, std::size_t base_offset = 0)
        : data_(data), base_(base_offset) {}

    std::size_t position() const { return pos_; }
    std::size_t absolute() const { return base_ + pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }
    bool empty() const { return remaining() == 0; }

    std::uint8_t u8() {
        need(1, "u8");
        return data_[pos_++];
    }
    std::uint16_t u16() {
        need(2, "u16");
        std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4, "u32");
        std::uint32_t v = static_cast<std::uint32_t>(data_[pos_]) << 24 |
                          static_cast<std::uint32_t>(data_[pos_ + 1]) << 16 |
                          static_cast<std::uint32_t>(data_[pos_ + 2]) << 8 | data_[pos_ + 3];
        pos_ += 4;
        return v;
    }
    std::uint16_t u16_le() {
        need(2, "u16");
        std::uint16_t v = static_cast<std::uint16_t>(data_[pos_ + 1] << 8 | data_[pos_]);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32_le() {
        need(4, "u32");
        std::uint32_t v = static_cast<std::uint32_t>(data_[pos_ + 3]) << 24 |
                          static_cast<std::uint32_t>(data_[pos_ + 2]) << 16 |
                          static_cast<std::uint32_t>(data_[pos_ + 1]) << 8 | data_[pos_];
        pos_ += 4;
        return v;
    }
    std::uint16_t u16(bool little) { return little ? u16_le() : u16(); }
    std::uint32_t u32(bool little) { return little ? u32_le() : u32(); }

    std::span<const std::uint8_t> bytes(std::size_t n) {
        need(n, "byte run");
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::vector<std::uint8_t> vec(std::size_t n) {
        auto s = bytes(n);
        return {s.begin(), s.end()};
    }
    MacAddress mac() {
        auto s = bytes(6);
        std::array<std::uint8_t, 6> a{};
        std::copy(s.begin(), s.end(), a.begin());
        return MacAddress{a};
    }
    Ipv4Address ipv4() { return Ipv4Address{u32()}; }
    /// UUID; with `little` the first three fields are byte-swapped (DCE/RPC drep).
    Uuid uuid(bool little = false);

    void skip(std::size_t n) {
        need(n, "skip");
        pos_ += n;
    }
    /// Sub-reader over the next `n` bytes; advances this reader past them.
    ByteReader sub(std::size_t n) {
        need(n, "sub-window");
        ByteReader r(data_.subspan(pos_, n), base_ + pos_);
        pos_ += n;
        return r;
    }
    std::span<const std::uint8_t> rest() const { return data_.subspan(pos_); }

    [[noreturn]] void fail(const std::string& reason) const { throw DecodeError(absolute(), reason); }

private:
    void need(std::size_t n, const char* what) const {
        if (remaining() < n)
            throw DecodeError(absolute(), std::string("truncated: need ") + std::to_string(n) +
                                              " bytes for " + what + ", have " +
                                              std::to_string(remaining()));
    }

    std::span<const std::uint8_t> data_;
    std::size_t base_;
    std::size_t pos_{0};
};

/// Append-only big-endian encoder with back-patching for length fields.
class ByteWriter {
public:
    std::vector<std::uint8_t>& buffer() { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
        buf_.push_back(static_cast<std::uint8_t>(v));
    }
    void u32(std::uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void u16_le(std::uint16_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v));
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32_le(std::uint32_t v) {
        for (int s = 0; s <= 24; s += 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void u16(std::uint16_t v, bool little) { little ? u16_le(v) : u16(v); }
    void u32(std::uint32_t v, bool little) { little ? u32_le(v) : u32(v); }
    void bytes(std::span<const std::uint8_t> s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    void zeros(std::size_t n) { buf_.insert(buf_.end(), n, 0); }
    void mac(const MacAddress& m) { bytes(m.bytes()); }
    void ipv4(const Ipv4Address& a) { u32(a.value()); }
    void uuid(const Uuid& u, bool little = false);
    void text(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

    void patch_u16(std::size_t at, std::uint16_t v) {
        buf_[at] = static_cast<std::uint8_t>(v >> 8);
        buf_[at + 1] = static_cast<std::uint8_t>(v);
    }
    void patch_u16(std::size_t at, std::uint16_t v, bool little) {
        if (little) {
            buf_[at] = static_cast<std::uint8_t>(v);
            buf_[at + 1] = static_cast<std::uint8_t>(v >> 8);
        } else {
            patch_u16(at, v);
        }
    }
    void patch_u32(std::size_t at, std::uint32_t v, bool little = false) {
        for (int i = 0; i < 4; ++i)
            buf_[at + i] = static_cast<std::uint8_t>(little ? v >> (8 * i) : v >> (24 - 8 * i));
    }

private:
    std::vector<std::uint8_t> buf_;
};

inline Uuid ByteReader::uuid(bool little) {
    auto s = bytes(16);
    std::array<std::uint8_t, 16> a{};
    std::copy(s.begin(), s.end(), a.begin());
    if (little) {
        std::swap(a[0], a[3]);
        std::swap(a[1], a[2]);
        std::swap(a[4], a[5]);
        std::swap(a[6], a[7]);
    }
    return Uuid{a};
}

inline void ByteWriter::uuid(const Uuid& u, bool little) {
    auto a = u.bytes();
    if (little) {
        std::swap(a[0], a[3]);
        std::swap(a[1], a[2]);
        std::swap(a[4], a[5]);
        std::swap(a[6], a[7]);
    }
    bytes(a);
}

}  // namespace poet

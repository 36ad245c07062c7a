#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace poet {

/// Capture timestamp: whole seconds since the epoch plus a nanosecond part.
struct Timestamp {
    std::int64_t seconds{0};
    std::uint32_t nanoseconds{0};

    auto operator<=>(const Timestamp&) const = default;

    static Timestamp from_nanoseconds(std::int64_t total);
    std::int64_t total_nanoseconds() const { return seconds * 1'000'000'000 + nanoseconds; }
    double to_seconds() const { return static_cast<double>(seconds) + nanoseconds * 1e-9; }

    /// "1700000000.030000000"; exact, used in every JSON document.
    std::string to_string() const;
    static std::optional<Timestamp> parse(std::string_view text);
};

class MacAddress {
public:
    constexpr MacAddress() = default;
    constexpr explicit MacAddress(std::array<std::uint8_t, 6> bytes) : bytes_(bytes) {}

    const std::array<std::uint8_t, 6>& bytes() const { return bytes_; }
    bool is_zero() const;
    bool is_multicast() const { return (bytes_[0] & 0x01) != 0; }

    /// Colon form, lowercase: "00:0e:cf:01:02:03".
    std::string to_string() const;
    /// Bare lowercase hex: "000ecf010203".
    std::string to_hex() const;
    /// Accepts colon, dash or bare-hex forms.
    static std::optional<MacAddress> parse(std::string_view text);

    /// Same address with the last octet advanced by `delta` (carrying into earlier octets).
    MacAddress offset(unsigned delta) const;

    auto operator<=>(const MacAddress&) const = default;

private:
    std::array<std::uint8_t, 6> bytes_{};
};

class Ipv4Address {
public:
    constexpr Ipv4Address() = default;
    constexpr explicit Ipv4Address(std::uint32_t host_order) : value_(host_order) {}

    std::uint32_t value() const { return value_; }
    bool is_unspecified() const { return value_ == 0; }
    std::string to_string() const;
    static std::optional<Ipv4Address> parse(std::string_view text);

    auto operator<=>(const Ipv4Address&) const = default;

private:
    std::uint32_t value_{0};
};

/// 16-byte UUID stored in canonical (textual, big-endian field) order.
class Uuid {
public:
    constexpr Uuid() = default;
    constexpr explicit Uuid(std::array<std::uint8_t, 16> bytes) : bytes_(bytes) {}

    const std::array<std::uint8_t, 16>& bytes() const { return bytes_; }
    bool is_nil() const;
    std::string to_string() const;
    static std::optional<Uuid> parse(std::string_view text);

    /// Deterministic UUID derived from a seed and a discriminator (version-4 layout bits set).
    static Uuid from_seed(std::uint64_t seed, std::uint64_t discriminator);

    auto operator<=>(const Uuid&) const = default;

private:
    std::array<std::uint8_t, 16> bytes_{};
};

/// Where an event or record came from.
struct FrameProvenance {
    std::uint64_t capture_index{0};
    std::string protocol;
    std::string summary;

    bool operator==(const FrameProvenance&) const = default;
};

std::string to_hex_string(const std::uint8_t* data, std::size_t size);

}  // namespace poet

#include "poet/types.hpp"

#include <charconv>
#include <cstdio>

namespace poet {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::string to_hex_string(const std::uint8_t* data, std::size_t size) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(size * 2);
    for (std::size_t i = 0; i < size; ++i) {
        out.push_back(kDigits[data[i] >> 4]);
        out.push_back(kDigits[data[i] & 0x0F]);
    }
    return out;
}

Timestamp Timestamp::from_nanoseconds(std::int64_t total) {
    std::int64_t sec = total / 1'000'000'000;
    std::int64_t rem = total % 1'000'000'000;
    if (rem < 0) {
        rem += 1'000'000'000;
        --sec;
    }
    return Timestamp{sec, static_cast<std::uint32_t>(rem)};
}

std::string Timestamp::to_string() const {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%lld.%09u", static_cast<long long>(seconds), nanoseconds);
    return buf;
}

std::optional<Timestamp> Timestamp::parse(std::string_view text) {
    auto dot = text.find('.');
    std::string_view whole = text.substr(0, dot);
    Timestamp ts;
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), ts.seconds);
    if (ec != std::errc{} || p != whole.data() + whole.size() || whole.empty()) return std::nullopt;
    if (dot != std::string_view::npos) {
        std::string_view frac = text.substr(dot + 1);
        if (frac.empty() || frac.size() > 9) return std::nullopt;
        std::uint32_t ns = 0;
        for (char c : frac) {
            if (c < '0' || c > '9') return std::nullopt;
            ns = ns * 10 + static_cast<std::uint32_t>(c - '0');
        }
        for (std::size_t i = frac.size(); i < 9; ++i) ns *= 10;
        ts.nanoseconds = ns;
    }
    return ts;
}

bool MacAddress::is_zero() const {
    for (auto b : bytes_)
        if (b != 0) return false;
    return true;
}

std::string MacAddress::to_string() const {
    char buf[18];
    std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", bytes_[0], bytes_[1], bytes_[2],
                  bytes_[3], bytes_[4], bytes_[5]);
    return buf;
}

std::string MacAddress::to_hex() const { return to_hex_string(bytes_.data(), bytes_.size()); }

std::optional<MacAddress> MacAddress::parse(std::string_view text) {
    std::array<std::uint8_t, 6> out{};
    std::size_t n = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == ':' || text[i] == '-') {
            ++i;
            continue;
        }
        if (i + 1 >= text.size() || n >= 6) return std::nullopt;
        int hi = hex_value(text[i]);
        int lo = hex_value(text[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out[n++] = static_cast<std::uint8_t>(hi << 4 | lo);
        i += 2;
    }
    if (n != 6) return std::nullopt;
    return MacAddress{out};
}

MacAddress MacAddress::offset(unsigned delta) const {
    auto b = bytes_;
    unsigned carry = delta;
    for (int i = 5; i >= 0 && carry != 0; --i) {
        unsigned sum = b[i] + (carry & 0xFF);
        b[i] = static_cast<std::uint8_t>(sum & 0xFF);
        carry = (carry >> 8) + (sum >> 8);
    }
    return MacAddress{b};
}

std::string Ipv4Address::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", value_ >> 24, (value_ >> 16) & 0xFF,
                  (value_ >> 8) & 0xFF, value_ & 0xFF);
    return buf;
}

std::optional<Ipv4Address> Ipv4Address::parse(std::string_view text) {
    std::uint32_t value = 0;
    int parts = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    while (parts < 4) {
        unsigned octet = 0;
        auto [q, ec] = std::from_chars(p, end, octet);
        if (ec != std::errc{} || q == p || octet > 255) return std::nullopt;
        value = value << 8 | octet;
        ++parts;
        p = q;
        if (parts < 4) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
    }
    if (p != end) return std::nullopt;
    return Ipv4Address{value};
}

bool Uuid::is_nil() const {
    for (auto b : bytes_)
        if (b != 0) return false;
    return true;
}

std::string Uuid::to_string() const {
    std::string hex = to_hex_string(bytes_.data(), bytes_.size());
    return hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) + "-" +
           hex.substr(16, 4) + "-" + hex.substr(20);
}

std::optional<Uuid> Uuid::parse(std::string_view text) {
    std::array<std::uint8_t, 16> out{};
    std::size_t n = 0;
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] == '-') {
            ++i;
            continue;
        }
        if (i + 1 >= text.size() || n >= 16) return std::nullopt;
        int hi = hex_value(text[i]);
        int lo = hex_value(text[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out[n++] = static_cast<std::uint8_t>(hi << 4 | lo);
        i += 2;
    }
    if (n != 16) return std::nullopt;
    return Uuid{out};
}

Uuid Uuid::from_seed(std::uint64_t seed, std::uint64_t discriminator) {
    std::uint64_t state = seed ^ (discriminator * 0xD1B54A32D192ED03ULL);
    std::array<std::uint8_t, 16> out{};
    for (int half = 0; half < 2; ++half) {
        std::uint64_t v = splitmix64(state);
        for (int i = 0; i < 8; ++i) out[half * 8 + i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
    }
    out[6] = static_cast<std::uint8_t>((out[6] & 0x0F) | 0x40);
    out[8] = static_cast<std::uint8_t>((out[8] & 0x3F) | 0x80);
    return Uuid{out};
}

}  // namespace poet

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iotsense {

/// Capture time in whole microseconds since the epoch. Integer storage keeps
/// slot assignment exact; `seconds()` is for arithmetic features only.
struct Timestamp {
  std::int64_t micros = 0;

  static constexpr Timestamp from_seconds(std::int64_t s) { return {s * 1'000'000}; }
  double seconds() const { return static_cast<double>(micros) / 1e6; }

  auto operator<=>(const Timestamp&) const = default;
};

/// Decimal seconds with up to six fractional digits, trailing zeros trimmed
/// ("1000.000001", "300").
std::string format_seconds(Timestamp t);
/// Inverse of format_seconds; accepts any decimal with at most six fractional
/// digits. Returns nullopt on malformed text.
std::optional<Timestamp> parse_seconds(std::string_view text);

enum class Direction { Outgoing, Incoming };

enum class Transport { TCP, UDP, Other };

struct IpInfo {
  int version = 4;
  std::uint8_t ttl = 0;
  std::uint16_t header_len = 0;
  std::string src_addr;
  std::string dst_addr;
  Transport transport = Transport::Other;
  /// IP protocol number (next header for v6); meaningful for Transport::Other.
  std::uint8_t protocol = 0;

  bool operator==(const IpInfo&) const = default;
};

struct TcpInfo {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint16_t window_size = 0;
  std::optional<std::uint32_t> ts_val;

  bool operator==(const TcpInfo&) const = default;
};

struct UdpInfo {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;

  bool operator==(const UdpInfo&) const = default;
};

struct DnsInfo {
  bool is_query = true;
  std::vector<std::string> qnames;

  bool operator==(const DnsInfo&) const = default;
};

struct DhcpInfo {
  std::optional<std::string> hostname;
  std::optional<std::string> vci;
  std::optional<std::vector<std::uint8_t>> prl;
  std::optional<std::uint32_t> max_size;
  std::optional<std::uint32_t> message_type;

  bool operator==(const DhcpInfo&) const = default;
};

struct HttpUaInfo {
  std::uint32_t length = 0;

  bool operator==(const HttpUaInfo&) const = default;
};

struct PacketRecord {
  Timestamp timestamp;
  std::string device_key;
  Direction direction = Direction::Outgoing;
  std::uint32_t frame_len = 0;
  std::optional<IpInfo> ip;
  std::optional<TcpInfo> tcp;
  std::optional<UdpInfo> udp;
  std::optional<DnsInfo> dns;
  std::optional<DhcpInfo> dhcp;
  std::optional<HttpUaInfo> http_ua;

  bool operator==(const PacketRecord&) const = default;
};

/// Checks the cross-field protocol invariants of a record (transport
/// exclusivity, DNS/DHCP port requirements).
bool protocol_invariants_hold(const PacketRecord& r);

using MacAddress = std::array<std::uint8_t, 6>;

/// Lowercase, colon-separated.
std::string format_mac(const MacAddress& mac);
/// Accepts `aa:bb:cc:dd:ee:ff` or `aa-bb-...` in any case.
std::optional<MacAddress> parse_mac(std::string_view text);

}  // namespace iotsense

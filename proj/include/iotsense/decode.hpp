#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "iotsense/packet.hpp"

namespace iotsense {

/// A decoded Ethernet frame. `record.device_key` and `record.direction` are
/// left unresolved until the frame is matched against a device manifest.
struct DecodedFrame {
  MacAddress src_mac{};
  MacAddress dst_mac{};
  PacketRecord record;
};

/// Decodes Ethernet / optional 802.1Q / IPv4 or IPv6 / TCP or UDP, plus DNS
/// queries, DHCP client options and HTTP User-Agent lengths.
///
/// Never throws on malformed input: a layer that cannot be parsed is left
/// absent and decoding stops there. Returns nullopt only when the frame is
/// shorter than an Ethernet header. `wire_len` defaults to the byte count.
std::optional<DecodedFrame> decode_frame(std::span<const std::uint8_t> frame, Timestamp ts,
                                         std::optional<std::uint32_t> wire_len = std::nullopt);

}  // namespace iotsense

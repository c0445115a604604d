#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iotsense/packet.hpp"

namespace iotsense {

struct RawFrame {
  Timestamp timestamp;
  /// Length on the wire as recorded in the pcap record header.
  std::uint32_t orig_len = 0;
  std::vector<std::uint8_t> bytes;
};

/// Parses a classic (libpcap) capture held in memory. Both byte orders and
/// both microsecond and nanosecond magics are accepted; only Ethernet
/// (link type 1) captures are supported. Nanosecond timestamps are rounded
/// half-up to microseconds.
///
/// Throws Error{BadMagic | UnsupportedLinkType | TruncatedHeader |
/// TruncatedRecord}.
std::vector<RawFrame> parse_pcap(std::span<const std::uint8_t> data);

std::vector<RawFrame> read_pcap_file(const std::string& path);

}  // namespace iotsense

#include "iotsense/packet.hpp"

#include <charconv>
#include <cstdio>

namespace iotsense {

std::string format_seconds(Timestamp t) {
  std::int64_t us = t.micros;
  bool negative = us < 0;
  std::uint64_t mag = negative ? static_cast<std::uint64_t>(-(us + 1)) + 1 : us;
  std::uint64_t whole = mag / 1'000'000;
  std::uint64_t frac = mag % 1'000'000;
  std::string out = negative ? "-" : "";
  out += std::to_string(whole);
  if (frac != 0) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(frac));
    std::string f(buf);
    while (f.back() == '0') f.pop_back();
    out += '.';
    out += f;
  }
  return out;
}

std::optional<Timestamp> parse_seconds(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  if (text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() || frac.size() > 6) return std::nullopt;
  if (dot != std::string_view::npos && frac.empty()) return std::nullopt;
  std::int64_t w = 0;
  auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
  if (ec != std::errc{} || p != whole.data() + whole.size()) return std::nullopt;
  std::int64_t f = 0;
  for (char c : frac) {
    if (c < '0' || c > '9') return std::nullopt;
    f = f * 10 + (c - '0');
  }
  for (std::size_t i = frac.size(); i < 6; ++i) f *= 10;
  std::int64_t us = w * 1'000'000 + f;
  return Timestamp{negative ? -us : us};
}

bool protocol_invariants_hold(const PacketRecord& r) {
  if (r.tcp && r.udp) return false;
  if (r.tcp && !(r.ip && r.ip->transport == Transport::TCP)) return false;
  if (r.udp && !(r.ip && r.ip->transport == Transport::UDP)) return false;
  if (r.http_ua && !r.tcp) return false;
  if (r.dns && !(r.udp && (r.udp->src_port == 53 || r.udp->dst_port == 53))) return false;
  if (r.dhcp) {
    if (!r.udp) return false;
    auto ok = [](std::uint16_t p) { return p == 67 || p == 68; };
    if (!ok(r.udp->src_port) || !ok(r.udp->dst_port)) return false;
  }
  return true;
}

std::string format_mac(const MacAddress& mac) {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", mac[0], mac[1], mac[2], mac[3],
                mac[4], mac[5]);
  return buf;
}

std::optional<MacAddress> parse_mac(std::string_view text) {
  if (text.size() != 17) return std::nullopt;
  MacAddress mac{};
  for (std::size_t i = 0; i < 6; ++i) {
    if (i > 0) {
      char sep = text[i * 3 - 1];
      if (sep != ':' && sep != '-') return std::nullopt;
    }
    auto hex = text.substr(i * 3, 2);
    unsigned v = 0;
    auto [p, ec] = std::from_chars(hex.data(), hex.data() + 2, v, 16);
    if (ec != std::errc{} || p != hex.data() + 2) return std::nullopt;
    mac[i] = static_cast<std::uint8_t>(v);
  }
  return mac;
}

}  // namespace iotsense

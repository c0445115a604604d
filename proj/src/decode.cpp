#include "iotsense/decode.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <string_view>

#include "byte_reader.hpp"

namespace iotsense {

namespace {

using Bytes = std::span<const std::uint8_t>;
using detail::be16;
using detail::be32;

constexpr std::uint16_t kEtherIpv4 = 0x0800;
constexpr std::uint16_t kEtherIpv6 = 0x86dd;
constexpr std::uint16_t kEtherVlan = 0x8100;
constexpr std::uint8_t kProtoTcp = 6;
constexpr std::uint8_t kProtoUdp = 17;
constexpr std::uint32_t kDhcpCookie = 0x63825363;
constexpr std::size_t kBootpFixed = 236;
constexpr int kMaxDnsPointerHops = 16;

std::string address_text(int family, const std::uint8_t* raw) {
  char buf[INET6_ADDRSTRLEN] = {};
  inet_ntop(family, raw, buf, sizeof buf);
  return buf;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Reads a possibly compressed domain name starting at `off`. Returns the
// offset just past the name in the original position, or nullopt.
std::optional<std::size_t> read_dns_name(Bytes msg, std::size_t off, std::string& name) {
  std::optional<std::size_t> resume;
  int hops = 0;
  name.clear();
  while (true) {
    if (off >= msg.size()) return std::nullopt;
    std::uint8_t len = msg[off];
    if ((len & 0xc0) == 0xc0) {
      if (off + 1 >= msg.size() || ++hops > kMaxDnsPointerHops) return std::nullopt;
      if (!resume) resume = off + 2;
      off = static_cast<std::size_t>(((len & 0x3f) << 8) | msg[off + 1]);
      continue;
    }
    if ((len & 0xc0) != 0) return std::nullopt;
    if (len == 0) {
      ++off;
      break;
    }
    if (off + 1 + len > msg.size()) return std::nullopt;
    if (!name.empty()) name += '.';
    name.append(reinterpret_cast<const char*>(msg.data() + off + 1), len);
    off += 1 + len;
    if (name.size() > 255) return std::nullopt;
  }
  return resume ? *resume : off;
}

std::optional<DnsInfo> decode_dns(Bytes msg) {
  if (msg.size() < 12) return std::nullopt;
  DnsInfo dns;
  dns.is_query = (msg[2] & 0x80) == 0;
  std::uint16_t qdcount = be16(msg, 4);
  std::size_t off = 12;
  std::string name;
  for (std::uint16_t i = 0; i < qdcount; ++i) {
    auto next = read_dns_name(msg, off, name);
    if (!next || *next + 4 > msg.size()) return std::nullopt;
    off = *next + 4;
    while (!name.empty() && name.back() == '.') name.pop_back();
    dns.qnames.push_back(lowercase(name));
  }
  return dns;
}

std::string option_text(Bytes value) {
  std::string s(reinterpret_cast<const char*>(value.data()), value.size());
  while (!s.empty() && s.back() == '\0') s.pop_back();
  return s;
}

std::optional<DhcpInfo> decode_dhcp(Bytes msg) {
  if (msg.size() < kBootpFixed + 4 || be32(msg, kBootpFixed) != kDhcpCookie) return std::nullopt;
  DhcpInfo dhcp;
  std::size_t off = kBootpFixed + 4;
  while (off < msg.size()) {
    std::uint8_t code = msg[off];
    if (code == 255) break;
    if (code == 0) {
      ++off;
      continue;
    }
    if (off + 1 >= msg.size()) break;
    std::size_t len = msg[off + 1];
    if (off + 2 + len > msg.size()) break;
    Bytes value = msg.subspan(off + 2, len);
    switch (code) {
      case 12:
        if (!dhcp.hostname) dhcp.hostname = option_text(value);
        break;
      case 60:
        if (!dhcp.vci) dhcp.vci = option_text(value);
        break;
      case 55:
        if (!dhcp.prl) dhcp.prl = std::vector<std::uint8_t>(value.begin(), value.end());
        break;
      case 57:
        if (!dhcp.max_size && len == 2) dhcp.max_size = be16(value, 0);
        break;
      case 53:
        if (!dhcp.message_type && len == 1) dhcp.message_type = value[0];
        break;
      default:
        break;
    }
    off += 2 + len;
  }
  return dhcp;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

std::optional<HttpUaInfo> decode_http_ua(Bytes payload) {
  static constexpr std::array<std::string_view, 7> kMethods = {
      "GET ", "POST ", "PUT ", "HEAD ", "DELETE ", "OPTIONS ", "PATCH "};
  std::string_view text(reinterpret_cast<const char*>(payload.data()), payload.size());
  bool is_request = std::any_of(kMethods.begin(), kMethods.end(),
                                [&](std::string_view m) { return text.starts_with(m); });
  if (!is_request) return std::nullopt;

  auto eol = text.find("\r\n");
  while (eol != std::string_view::npos) {
    std::size_t start = eol + 2;
    eol = text.find("\r\n", start);
    if (eol == std::string_view::npos) break;
    std::string_view line = text.substr(start, eol - start);
    if (line.empty()) break;
    constexpr std::string_view kHeader = "user-agent:";
    if (starts_with_ci(line, kHeader)) {
      line.remove_prefix(kHeader.size());
      while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
      while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
      return HttpUaInfo{static_cast<std::uint32_t>(line.size())};
    }
  }
  return std::nullopt;
}

void decode_tcp(Bytes seg, PacketRecord& rec) {
  if (seg.size() < 20) return;
  std::size_t doff = static_cast<std::size_t>(seg[12] >> 4) * 4;
  if (doff < 20 || doff > seg.size()) return;
  TcpInfo tcp;
  tcp.src_port = be16(seg, 0);
  tcp.dst_port = be16(seg, 2);
  tcp.window_size = be16(seg, 14);
  std::size_t off = 20;
  while (off < doff) {
    std::uint8_t kind = seg[off];
    if (kind == 0) break;
    if (kind == 1) {
      ++off;
      continue;
    }
    if (off + 1 >= doff) break;
    std::size_t len = seg[off + 1];
    if (len < 2 || off + len > doff) break;
    if (kind == 8 && len == 10) tcp.ts_val = be32(seg, off + 2);
    off += len;
  }
  rec.tcp = tcp;
  rec.http_ua = decode_http_ua(seg.subspan(doff));
}

void decode_udp(Bytes dgram, PacketRecord& rec) {
  if (dgram.size() < 8) return;
  UdpInfo udp{be16(dgram, 0), be16(dgram, 2)};
  std::size_t udp_len = be16(dgram, 4);
  std::size_t end = udp_len >= 8 ? std::min(udp_len, dgram.size()) : dgram.size();
  Bytes payload = dgram.subspan(8, end - 8);
  rec.udp = udp;
  if (udp.src_port == 53 || udp.dst_port == 53) rec.dns = decode_dns(payload);
  auto dhcp_port = [](std::uint16_t p) { return p == 67 || p == 68; };
  if (dhcp_port(udp.src_port) && dhcp_port(udp.dst_port)) rec.dhcp = decode_dhcp(payload);
}

void decode_transport(std::uint8_t proto, Bytes payload, PacketRecord& rec) {
  if (proto == kProtoTcp) decode_tcp(payload, rec);
  else if (proto == kProtoUdp) decode_udp(payload, rec);
}

Transport transport_of(std::uint8_t proto) {
  if (proto == kProtoTcp) return Transport::TCP;
  if (proto == kProtoUdp) return Transport::UDP;
  return Transport::Other;
}

void decode_ipv4(Bytes pkt, PacketRecord& rec) {
  if (pkt.size() < 20 || (pkt[0] >> 4) != 4) return;
  std::size_t ihl = static_cast<std::size_t>(pkt[0] & 0x0f) * 4;
  std::size_t total = be16(pkt, 2);
  if (ihl < 20 || ihl > pkt.size() || total < ihl) return;
  IpInfo ip;
  ip.version = 4;
  ip.ttl = pkt[8];
  ip.header_len = static_cast<std::uint16_t>(ihl);
  ip.protocol = pkt[9];
  ip.transport = transport_of(ip.protocol);
  ip.src_addr = address_text(AF_INET, pkt.data() + 12);
  ip.dst_addr = address_text(AF_INET, pkt.data() + 16);
  rec.ip = ip;
  bool later_fragment = (be16(pkt, 6) & 0x1fff) != 0;
  if (later_fragment) return;
  std::size_t end = std::min(total, pkt.size());
  decode_transport(ip.protocol, pkt.subspan(ihl, end - ihl), rec);
}

void decode_ipv6(Bytes pkt, PacketRecord& rec) {
  if (pkt.size() < 40 || (pkt[0] >> 4) != 6) return;
  IpInfo ip;
  ip.version = 6;
  ip.ttl = pkt[7];
  ip.header_len = 40;
  ip.protocol = pkt[6];
  ip.transport = transport_of(ip.protocol);
  ip.src_addr = address_text(AF_INET6, pkt.data() + 8);
  ip.dst_addr = address_text(AF_INET6, pkt.data() + 24);
  rec.ip = ip;
  std::size_t end = std::min<std::size_t>(40 + be16(pkt, 4), pkt.size());
  decode_transport(ip.protocol, pkt.subspan(40, end - 40), rec);
}

}  // namespace

std::optional<DecodedFrame> decode_frame(std::span<const std::uint8_t> frame, Timestamp ts,
                                         std::optional<std::uint32_t> wire_len) {
  if (frame.size() < 14) return std::nullopt;
  DecodedFrame out;
  std::copy_n(frame.begin(), 6, out.dst_mac.begin());
  std::copy_n(frame.begin() + 6, 6, out.src_mac.begin());
  PacketRecord& rec = out.record;
  rec.timestamp = ts;
  auto captured = static_cast<std::uint32_t>(std::min<std::size_t>(frame.size(), UINT32_MAX));
  rec.frame_len = std::max(wire_len.value_or(captured), captured);

  std::uint16_t ethertype = be16(frame, 12);
  std::size_t off = 14;
  if (ethertype == kEtherVlan) {
    if (frame.size() < 18) return out;
    ethertype = be16(frame, 16);
    off = 18;
  }
  Bytes payload = frame.subspan(off);
  if (ethertype == kEtherIpv4) decode_ipv4(payload, rec);
  else if (ethertype == kEtherIpv6) decode_ipv6(payload, rec);
  return out;
}

}  // namespace iotsense

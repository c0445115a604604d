#pragma once

// Byte-level frame builders for tests. They follow the wire layouts directly
// and share no code with the decoder.

#include <cstdint>
#include <string>
#include <vector>

namespace testsupport {

using Bytes = std::vector<std::uint8_t>;

inline void put16(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}

inline void put32(Bytes& b, std::uint32_t v) {
  put16(b, static_cast<std::uint16_t>(v >> 16));
  put16(b, static_cast<std::uint16_t>(v));
}

inline Bytes ethernet(const Bytes& dst, const Bytes& src, std::uint16_t type, const Bytes& payload,
                      bool vlan = false) {
  Bytes f = dst;
  f.insert(f.end(), src.begin(), src.end());
  if (vlan) {
    put16(f, 0x8100);
    put16(f, 0x0064);
  }
  put16(f, type);
  f.insert(f.end(), payload.begin(), payload.end());
  return f;
}

inline Bytes mac(std::uint8_t last) { return {0x02, 0x00, 0x00, 0x00, 0x00, last}; }

inline Bytes ipv4(std::uint8_t proto, const Bytes& src, const Bytes& dst, const Bytes& payload,
                  std::uint8_t ttl = 64, std::size_t options = 0) {
  Bytes p;
  std::size_t ihl = 20 + options;
  p.push_back(static_cast<std::uint8_t>(0x40 | (ihl / 4)));
  p.push_back(0);
  put16(p, static_cast<std::uint16_t>(ihl + payload.size()));
  put16(p, 0x1234);
  put16(p, 0x4000);  // DF, offset 0
  p.push_back(ttl);
  p.push_back(proto);
  put16(p, 0);  // checksum is not verified by the decoder
  p.insert(p.end(), src.begin(), src.end());
  p.insert(p.end(), dst.begin(), dst.end());
  for (std::size_t i = 0; i < options; ++i) p.push_back(1);  // NOP options
  p.insert(p.end(), payload.begin(), payload.end());
  return p;
}

inline Bytes ipv6(std::uint8_t next, std::uint8_t hop_limit, const Bytes& payload) {
  Bytes p = {0x60, 0, 0, 0};
  put16(p, static_cast<std::uint16_t>(payload.size()));
  p.push_back(next);
  p.push_back(hop_limit);
  Bytes src(16, 0), dst(16, 0);
  src[0] = 0xfe;
  src[1] = 0x80;
  src[15] = 1;
  dst[0] = 0x20;
  dst[1] = 0x01;
  dst[15] = 2;
  p.insert(p.end(), src.begin(), src.end());
  p.insert(p.end(), dst.begin(), dst.end());
  p.insert(p.end(), payload.begin(), payload.end());
  return p;
}

inline Bytes tcp(std::uint16_t sport, std::uint16_t dport, std::uint16_t window,
                 const Bytes& payload = {}, bool with_ts = false, std::uint32_t tsval = 0) {
  Bytes t;
  put16(t, sport);
  put16(t, dport);
  put32(t, 1);
  put32(t, 0);
  std::size_t hlen = with_ts ? 32 : 20;
  t.push_back(static_cast<std::uint8_t>((hlen / 4) << 4));
  t.push_back(0x02);  // SYN
  put16(t, window);
  put16(t, 0);
  put16(t, 0);
  if (with_ts) {
    t.push_back(1);
    t.push_back(1);
    t.push_back(8);
    t.push_back(10);
    put32(t, tsval);
    put32(t, 0);
    t.push_back(0);
    t.push_back(0);
  }
  t.insert(t.end(), payload.begin(), payload.end());
  return t;
}

inline Bytes udp(std::uint16_t sport, std::uint16_t dport, const Bytes& payload) {
  Bytes u;
  put16(u, sport);
  put16(u, dport);
  put16(u, static_cast<std::uint16_t>(8 + payload.size()));
  put16(u, 0);
  u.insert(u.end(), payload.begin(), payload.end());
  return u;
}

inline Bytes dns_question(const std::vector<std::string>& names, bool response = false) {
  Bytes d;
  put16(d, 0x0101);
  put16(d, response ? 0x8180 : 0x0100);
  put16(d, static_cast<std::uint16_t>(names.size()));
  put16(d, 0);
  put16(d, 0);
  put16(d, 0);
  for (const auto& name : names) {
    std::size_t start = 0;
    while (start < name.size()) {
      auto dot = name.find('.', start);
      if (dot == std::string::npos) dot = name.size();
      d.push_back(static_cast<std::uint8_t>(dot - start));
      for (std::size_t i = start; i < dot; ++i) d.push_back(static_cast<std::uint8_t>(name[i]));
      start = dot + 1;
    }
    d.push_back(0);
    put16(d, 1);
    put16(d, 1);
  }
  return d;
}

struct DhcpOption {
  std::uint8_t code;
  Bytes value;
};

inline Bytes dhcp_message(const std::vector<DhcpOption>& options, bool with_cookie = true) {
  Bytes d(236, 0);
  d[0] = 1;  // BOOTREQUEST
  d[1] = 1;
  d[2] = 6;
  if (with_cookie) put32(d, 0x63825363);
  else put32(d, 0x01020304);
  for (const auto& o : options) {
    d.push_back(o.code);
    d.push_back(static_cast<std::uint8_t>(o.value.size()));
    d.insert(d.end(), o.value.begin(), o.value.end());
  }
  d.push_back(255);
  return d;
}

inline Bytes text(const std::string& s) { return Bytes(s.begin(), s.end()); }

inline const Bytes kDevIp = {192, 168, 1, 10};
inline const Bytes kRemoteIp = {93, 184, 216, 34};

}  // namespace testsupport

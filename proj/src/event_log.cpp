#include "iotsense/event_log.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>

#include "json.hpp"

#include "iotsense/error.hpp"

namespace iotsense {

namespace {

using ojson = nlohmann::ordered_json;
using nlohmann::json;

// Parsing helpers raise std::runtime_error; parse_event_line rewraps them
// with the line number.
[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void check_keys(const json& obj, std::string_view where,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) fail("unknown key '" + key + "' in " + std::string(where));
  }
}

const json& require(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail("missing key '" + std::string(key) + "' in " + std::string(where));
  return *it;
}

template <typename T>
T as_uint(const json& v, const char* what) {
  if (!v.is_number_unsigned()) fail(std::string(what) + " must be a non-negative integer");
  auto raw = v.get<std::uint64_t>();
  if (raw > std::numeric_limits<T>::max()) fail(std::string(what) + " out of range");
  return static_cast<T>(raw);
}

std::string as_string(const json& v, const char* what) {
  if (!v.is_string()) fail(std::string(what) + " must be a string");
  return v.get<std::string>();
}

Timestamp as_timestamp(const json& v) {
  if (v.is_number_integer()) return Timestamp::from_seconds(v.get<std::int64_t>());
  if (!v.is_number_float()) fail("timestamp must be a number");
  double s = v.get<double>();
  if (!std::isfinite(s) || std::fabs(s) > 9e9) fail("timestamp out of range");
  return Timestamp{std::llround(s * 1e6)};
}

IpInfo parse_ip(const json& j) {
  check_keys(j, "ip", {"version", "ttl", "header_len", "src_addr", "dst_addr", "transport"});
  IpInfo ip;
  ip.version = as_uint<std::uint8_t>(require(j, "version", "ip"), "ip.version");
  if (ip.version != 4 && ip.version != 6) fail("ip.version must be 4 or 6");
  ip.ttl = as_uint<std::uint8_t>(require(j, "ttl", "ip"), "ip.ttl");
  ip.header_len = as_uint<std::uint16_t>(require(j, "header_len", "ip"), "ip.header_len");
  ip.src_addr = as_string(require(j, "src_addr", "ip"), "ip.src_addr");
  ip.dst_addr = as_string(require(j, "dst_addr", "ip"), "ip.dst_addr");
  const json& t = require(j, "transport", "ip");
  if (t.is_string()) {
    auto s = t.get<std::string>();
    if (s == "TCP") {
      ip.transport = Transport::TCP;
      ip.protocol = 6;
    } else if (s == "UDP") {
      ip.transport = Transport::UDP;
      ip.protocol = 17;
    } else {
      fail("ip.transport must be \"TCP\", \"UDP\" or a protocol number");
    }
  } else {
    ip.protocol = as_uint<std::uint8_t>(t, "ip.transport");
    if (ip.protocol == 6 || ip.protocol == 17) fail("ip.transport: use \"TCP\"/\"UDP\" names");
    ip.transport = Transport::Other;
  }
  return ip;
}

TcpInfo parse_tcp(const json& j) {
  check_keys(j, "tcp", {"src_port", "dst_port", "window_size", "ts_val"});
  TcpInfo tcp;
  tcp.src_port = as_uint<std::uint16_t>(require(j, "src_port", "tcp"), "tcp.src_port");
  tcp.dst_port = as_uint<std::uint16_t>(require(j, "dst_port", "tcp"), "tcp.dst_port");
  tcp.window_size = as_uint<std::uint16_t>(require(j, "window_size", "tcp"), "tcp.window_size");
  if (j.contains("ts_val")) tcp.ts_val = as_uint<std::uint32_t>(j["ts_val"], "tcp.ts_val");
  return tcp;
}

UdpInfo parse_udp(const json& j) {
  check_keys(j, "udp", {"src_port", "dst_port"});
  return {as_uint<std::uint16_t>(require(j, "src_port", "udp"), "udp.src_port"),
          as_uint<std::uint16_t>(require(j, "dst_port", "udp"), "udp.dst_port")};
}

DnsInfo parse_dns(const json& j) {
  check_keys(j, "dns", {"is_query", "qnames"});
  DnsInfo dns;
  const json& q = require(j, "is_query", "dns");
  if (!q.is_boolean()) fail("dns.is_query must be a boolean");
  dns.is_query = q.get<bool>();
  const json& names = require(j, "qnames", "dns");
  if (!names.is_array()) fail("dns.qnames must be an array");
  for (const auto& n : names) dns.qnames.push_back(as_string(n, "dns.qnames[]"));
  return dns;
}

DhcpInfo parse_dhcp(const json& j) {
  check_keys(j, "dhcp", {"hostname", "vci", "prl", "max_size", "message_type"});
  DhcpInfo d;
  if (j.contains("hostname")) d.hostname = as_string(j["hostname"], "dhcp.hostname");
  if (j.contains("vci")) d.vci = as_string(j["vci"], "dhcp.vci");
  if (j.contains("prl")) {
    if (!j["prl"].is_array()) fail("dhcp.prl must be an array");
    d.prl.emplace();
    for (const auto& c : j["prl"]) d.prl->push_back(as_uint<std::uint8_t>(c, "dhcp.prl[]"));
  }
  if (j.contains("max_size")) d.max_size = as_uint<std::uint32_t>(j["max_size"], "dhcp.max_size");
  if (j.contains("message_type"))
    d.message_type = as_uint<std::uint32_t>(j["message_type"], "dhcp.message_type");
  return d;
}

}  // namespace

PacketRecord parse_event_line(std::string_view line, std::size_t line_no) {
  try {
    json j = json::parse(line);
    check_keys(j, "record",
               {"timestamp", "device_key", "direction", "frame_len", "ip", "tcp", "udp", "dns",
                "dhcp", "http_ua"});
    PacketRecord r;
    r.timestamp = as_timestamp(require(j, "timestamp", "record"));
    r.device_key = as_string(require(j, "device_key", "record"), "device_key");
    if (auto mac = parse_mac(r.device_key)) r.device_key = format_mac(*mac);
    auto dir = as_string(require(j, "direction", "record"), "direction");
    if (dir == "Outgoing") r.direction = Direction::Outgoing;
    else if (dir == "Incoming") r.direction = Direction::Incoming;
    else fail("direction must be \"Outgoing\" or \"Incoming\", got \"" + dir + "\"");
    r.frame_len = as_uint<std::uint32_t>(require(j, "frame_len", "record"), "frame_len");
    if (j.contains("ip")) r.ip = parse_ip(j["ip"]);
    if (j.contains("tcp")) r.tcp = parse_tcp(j["tcp"]);
    if (j.contains("udp")) r.udp = parse_udp(j["udp"]);
    if (j.contains("dns")) r.dns = parse_dns(j["dns"]);
    if (j.contains("dhcp")) r.dhcp = parse_dhcp(j["dhcp"]);
    if (j.contains("http_ua")) {
      check_keys(j["http_ua"], "http_ua", {"length"});
      r.http_ua = HttpUaInfo{
          as_uint<std::uint32_t>(require(j["http_ua"], "length", "http_ua"), "http_ua.length")};
    }
    if (!protocol_invariants_hold(r)) fail("protocol fields violate port/transport invariants");
    return r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::SchemaError, "line " + std::to_string(line_no) + ": " + e.what());
  }
}

std::vector<PacketRecord> parse_event_log(std::istream& in) {
  std::vector<PacketRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_event_line(line, line_no));
  }
  return out;
}

std::vector<PacketRecord> read_event_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return parse_event_log(in);
}

std::string serialize_event(const PacketRecord& r) {
  ojson j;
  j["device_key"] = r.device_key;
  j["direction"] = r.direction == Direction::Outgoing ? "Outgoing" : "Incoming";
  j["frame_len"] = r.frame_len;
  if (r.ip) {
    ojson ip;
    ip["version"] = r.ip->version;
    ip["ttl"] = r.ip->ttl;
    ip["header_len"] = r.ip->header_len;
    ip["src_addr"] = r.ip->src_addr;
    ip["dst_addr"] = r.ip->dst_addr;
    switch (r.ip->transport) {
      case Transport::TCP: ip["transport"] = "TCP"; break;
      case Transport::UDP: ip["transport"] = "UDP"; break;
      case Transport::Other: ip["transport"] = r.ip->protocol; break;
    }
    j["ip"] = std::move(ip);
  }
  if (r.tcp) {
    ojson t;
    t["src_port"] = r.tcp->src_port;
    t["dst_port"] = r.tcp->dst_port;
    t["window_size"] = r.tcp->window_size;
    if (r.tcp->ts_val) t["ts_val"] = *r.tcp->ts_val;
    j["tcp"] = std::move(t);
  }
  if (r.udp) j["udp"] = ojson{{"src_port", r.udp->src_port}, {"dst_port", r.udp->dst_port}};
  if (r.dns) j["dns"] = ojson{{"is_query", r.dns->is_query}, {"qnames", r.dns->qnames}};
  if (r.dhcp) {
    ojson d = ojson::object();
    if (r.dhcp->hostname) d["hostname"] = *r.dhcp->hostname;
    if (r.dhcp->vci) d["vci"] = *r.dhcp->vci;
    if (r.dhcp->prl) d["prl"] = *r.dhcp->prl;
    if (r.dhcp->max_size) d["max_size"] = *r.dhcp->max_size;
    if (r.dhcp->message_type) d["message_type"] = *r.dhcp->message_type;
    j["dhcp"] = std::move(d);
  }
  if (r.http_ua) j["http_ua"] = ojson{{"length", r.http_ua->length}};
  // The timestamp is written by hand so the decimal text is exact.
  auto body = j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  return "{\"timestamp\":" + format_seconds(r.timestamp) + "," + body.substr(1);
}

void write_event_log(std::ostream& out, const std::vector<PacketRecord>& records) {
  for (const auto& r : records) out << serialize_event(r) << '\n';
}

}  // namespace iotsense

#include "iotsense/features.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "iotsense/error.hpp"

namespace iotsense {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {
    "pkt_count",       "bandwidth_bytes",     "avg_pkt_len",     "avg_interleave",
    "std_interleave",  "n_remote_ips",        "avg_ttl",         "avg_ip_hdr_len",
    "max_ip_hdr_len",  "min_ip_hdr_len",      "n_unique_ip_hdr_len", "n_ports",
    "tcp_udp_ratio",   "n_remote_endpoints",  "max_tcp_window",  "mean_tcp_window",
    "min_tcp_window",  "n_unique_tcp_window", "tcpts_lls_error", "n_unique_dns",
    "n_dns",           "avg_ua_len",
};

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::string_view feature_name(FeatureId id) { return kNames[static_cast<std::size_t>(id)]; }

std::optional<FeatureId> parse_feature(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kNames[i] == name) return static_cast<FeatureId>(i);
  }
  return std::nullopt;
}

const std::array<FeatureId, kFeatureCount>& all_features() {
  static const auto ids = [] {
    std::array<FeatureId, kFeatureCount> a{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) a[i] = static_cast<FeatureId>(i);
    return a;
  }();
  return ids;
}

std::vector<Slot> slice_slots(std::span<const PacketRecord> trace, const SlotConfig& cfg) {
  if (cfg.width_seconds <= 0) throw std::invalid_argument("slot width must be positive");
  std::vector<Slot> slots;
  if (trace.empty()) return slots;
  const std::int64_t width = cfg.width_seconds * 1'000'000;
  const std::int64_t origin =
      cfg.origin ? cfg.origin->micros : floor_div(trace.front().timestamp.micros, width) * width;

  for (const auto& r : trace) {
    std::int64_t start = origin + floor_div(r.timestamp.micros - origin, width) * width;
    if (slots.empty() || slots.back().start.micros != start) {
      // Sorted input keeps slots contiguous; tolerate stragglers by lookup.
      auto it = std::find_if(slots.begin(), slots.end(),
                             [&](const Slot& s) { return s.start.micros == start; });
      if (it != slots.end()) {
        it->records.push_back(r);
        continue;
      }
      slots.push_back({Timestamp{start}, {}});
    }
    slots.back().records.push_back(r);
  }
  std::sort(slots.begin(), slots.end(),
            [](const Slot& a, const Slot& b) { return a.start < b.start; });
  return slots;
}

std::optional<double> tcpts_lls_error(std::span<const TcpTsSample> samples) {
  if (samples.size() < 2) return std::nullopt;
  const double n = static_cast<double>(samples.size());
  double t_mean = 0, v_mean = 0;
  for (const auto& s : samples) {
    t_mean += s.t;
    v_mean += s.v;
  }
  t_mean /= n;
  v_mean /= n;
  double stt = 0, stv = 0;
  bool all_equal = true;
  for (const auto& s : samples) {
    double dt = s.t - t_mean;
    stt += dt * dt;
    stv += dt * (s.v - v_mean);
    all_equal = all_equal && s.t == samples.front().t;
  }
  if (all_equal || stt == 0) return std::nullopt;
  const double slope = stv / stt;
  double sse = 0;
  for (const auto& s : samples) {
    double r = (s.v - v_mean) - slope * (s.t - t_mean);
    sse += r * r;
  }
  return std::sqrt(sse / n);
}

SlotFeatureVector extract_features(std::span<const PacketRecord> records,
                                   const std::string& device_key, Timestamp slot_start,
                                   std::int64_t width_seconds) {
  SlotFeatureVector out;
  out.device_key = device_key;
  out.slot_start = slot_start;
  out.width_seconds = width_seconds;

  std::vector<std::int64_t> out_times;
  double bandwidth = 0;
  std::vector<double> ttls, hdr_lens;
  std::set<std::uint16_t> unique_hdr_lens, src_ports, unique_windows;
  std::size_t tcp_count = 0, udp_count = 0;
  std::set<std::string> peers;
  std::set<std::pair<std::string, std::uint16_t>> endpoints;
  std::vector<double> windows;
  std::vector<TcpTsSample> ts_samples;
  std::int64_t ts_origin = 0;
  std::size_t dns_queries = 0;
  std::set<std::string> qnames;
  std::vector<double> ua_lens;

  // Visit records in time order so sums do not depend on input order.
  std::vector<const PacketRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& r : records) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const PacketRecord* a, const PacketRecord* b) { return a->timestamp < b->timestamp; });

  for (const PacketRecord* rp : ordered) {
    const PacketRecord& r = *rp;
    const bool outgoing = r.direction == Direction::Outgoing;
    if (r.ip) {
      const std::string& peer = outgoing ? r.ip->dst_addr : r.ip->src_addr;
      peers.insert(peer);
      if (r.tcp) endpoints.emplace(peer, outgoing ? r.tcp->dst_port : r.tcp->src_port);
      if (r.udp) endpoints.emplace(peer, outgoing ? r.udp->dst_port : r.udp->src_port);
    }
    if (!outgoing) continue;

    out_times.push_back(r.timestamp.micros);
    bandwidth += r.frame_len;
    if (r.ip) {
      ttls.push_back(r.ip->ttl);
      hdr_lens.push_back(r.ip->header_len);
      unique_hdr_lens.insert(r.ip->header_len);
    }
    if (r.tcp) {
      ++tcp_count;
      src_ports.insert(r.tcp->src_port);
      windows.push_back(r.tcp->window_size);
      unique_windows.insert(r.tcp->window_size);
      if (r.tcp->ts_val) {
        // Times are taken relative to the first sample so the fit keeps
        // microsecond precision; the residual is shift invariant.
        if (ts_samples.empty()) ts_origin = r.timestamp.micros;
        ts_samples.push_back(
            {static_cast<double>(r.timestamp.micros - ts_origin) / 1e6, double(*r.tcp->ts_val)});
      }
    }
    if (r.udp) {
      ++udp_count;
      src_ports.insert(r.udp->src_port);
    }
    if (r.dns && r.dns->is_query) {
      ++dns_queries;
      for (const auto& q : r.dns->qnames) qnames.insert(lowercase(q));
    }
    if (r.http_ua) ua_lens.push_back(r.http_ua->length);
  }

  using F = FeatureId;
  if (!out_times.empty()) {
    const double n = static_cast<double>(out_times.size());
    out[F::pkt_count] = n;
    out[F::bandwidth_bytes] = bandwidth;
    out[F::avg_pkt_len] = bandwidth / n;
  }
  if (out_times.size() >= 2) {
    std::sort(out_times.begin(), out_times.end());
    std::vector<double> gaps;
    for (std::size_t i = 1; i < out_times.size(); ++i)
      gaps.push_back(static_cast<double>(out_times[i] - out_times[i - 1]) / 1e6);
    double m = mean_of(gaps);
    double var = 0;
    for (double g : gaps) var += (g - m) * (g - m);
    out[F::avg_interleave] = m;
    out[F::std_interleave] = std::sqrt(var / static_cast<double>(gaps.size()));
  }
  if (!peers.empty()) out[F::n_remote_ips] = static_cast<double>(peers.size());
  if (!endpoints.empty()) out[F::n_remote_endpoints] = static_cast<double>(endpoints.size());
  if (!ttls.empty()) {
    out[F::avg_ttl] = mean_of(ttls);
    out[F::avg_ip_hdr_len] = mean_of(hdr_lens);
    out[F::max_ip_hdr_len] = *std::max_element(hdr_lens.begin(), hdr_lens.end());
    out[F::min_ip_hdr_len] = *std::min_element(hdr_lens.begin(), hdr_lens.end());
    out[F::n_unique_ip_hdr_len] = static_cast<double>(unique_hdr_lens.size());
  }
  if (tcp_count + udp_count > 0) {
    out[F::n_ports] = static_cast<double>(src_ports.size());
    out[F::tcp_udp_ratio] = (double(tcp_count) + 1.0) / (double(udp_count) + 1.0);
    // Traffic without any DNS query is a genuine zero, not a missing value.
    out[F::n_dns] = static_cast<double>(dns_queries);
    out[F::n_unique_dns] = static_cast<double>(qnames.size());
  }
  if (!windows.empty()) {
    out[F::max_tcp_window] = *std::max_element(windows.begin(), windows.end());
    out[F::mean_tcp_window] = mean_of(windows);
    out[F::min_tcp_window] = *std::min_element(windows.begin(), windows.end());
    out[F::n_unique_tcp_window] = static_cast<double>(unique_windows.size());
  }
  out[F::tcpts_lls_error] = tcpts_lls_error(ts_samples);
  if (!ua_lens.empty()) out[F::avg_ua_len] = mean_of(ua_lens);
  return out;
}

std::vector<SlotFeatureVector> extract_trace_features(const DeviceTrace& trace,
                                                      const SlotConfig& cfg) {
  std::vector<SlotFeatureVector> rows;
  for (const auto& slot : slice_slots(trace.records, cfg))
    rows.push_back(extract_features(slot.records, trace.device_key, slot.start, cfg.width_seconds));
  return rows;
}

void write_feature_csv(std::ostream& out, const std::vector<SlotFeatureVector>& rows) {
  out << "device_key,slot_start,width";
  for (auto name : kNames) out << ',' << name;
  out << '\n';
  char buf[64];
  for (const auto& row : rows) {
    out << row.device_key << ',' << format_seconds(row.slot_start) << ',' << row.width_seconds;
    for (const auto& v : row.values) {
      out << ',';
      if (v) {
        std::snprintf(buf, sizeof buf, "%.17g", *v);
        out << buf;
      }
    }
    out << '\n';
  }
}

std::vector<SlotFeatureVector> read_feature_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return cells;
  };
  auto bad = [](std::size_t line_no, const std::string& msg) {
    return Error(ErrorKind::SchemaError, "line " + std::to_string(line_no) + ": " + msg);
  };

  std::vector<SlotFeatureVector> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != 3 + kFeatureCount) throw bad(line_no, "expected 25 columns");
    if (!header) {
      if (cells[0] != "device_key" || cells[1] != "slot_start" || cells[2] != "width")
        throw bad(line_no, "bad feature CSV header");
      for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (cells[3 + i] != kNames[i]) throw bad(line_no, "unexpected column '" + cells[3 + i] + "'");
      }
      header = true;
      continue;
    }
    SlotFeatureVector row;
    row.device_key = cells[0];
    auto start = parse_seconds(cells[1]);
    if (!start) throw bad(line_no, "bad slot_start");
    row.slot_start = *start;
    auto [p, ec] = std::from_chars(cells[2].data(), cells[2].data() + cells[2].size(),
                                   row.width_seconds);
    if (ec != std::errc{} || p != cells[2].data() + cells[2].size() || row.width_seconds <= 0)
      throw bad(line_no, "bad width");
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const std::string& c = cells[3 + i];
      if (c.empty()) continue;
      try {
        std::size_t used = 0;
        double v = std::stod(c, &used);
        if (used != c.size()) throw std::invalid_argument(c);
        row.values[i] = v;
      } catch (const std::exception&) {
        throw bad(line_no, "bad value in column " + std::string(kNames[i]));
      }
    }
    rows.push_back(std::move(row));
  }
  if (!header) throw Error(ErrorKind::SchemaError, "feature CSV has no header");
  return rows;
}

}  // namespace iotsense

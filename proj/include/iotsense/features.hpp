#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iotsense/demux.hpp"
#include "iotsense/packet.hpp"

namespace iotsense {

// Canonical order; also the tie-break order for feature selection and the
// column order of the feature CSV.
enum class FeatureId : std::uint8_t {
  pkt_count,
  bandwidth_bytes,
  avg_pkt_len,
  avg_interleave,
  std_interleave,
  n_remote_ips,
  avg_ttl,
  avg_ip_hdr_len,
  max_ip_hdr_len,
  min_ip_hdr_len,
  n_unique_ip_hdr_len,
  n_ports,
  tcp_udp_ratio,
  n_remote_endpoints,
  max_tcp_window,
  mean_tcp_window,
  min_tcp_window,
  n_unique_tcp_window,
  tcpts_lls_error,
  n_unique_dns,
  n_dns,
  avg_ua_len,
};

inline constexpr std::size_t kFeatureCount = 22;

std::string_view feature_name(FeatureId id);
std::optional<FeatureId> parse_feature(std::string_view name);
const std::array<FeatureId, kFeatureCount>& all_features();

struct SlotConfig {
  std::int64_t width_seconds = 600;
  /// Explicit slot origin; by default slots are aligned to multiples of the
  /// width since the epoch.
  std::optional<Timestamp> origin;
};

struct SlotFeatureVector {
  std::string device_key;
  Timestamp slot_start;
  std::int64_t width_seconds = 0;
  std::array<std::optional<double>, kFeatureCount> values{};

  std::optional<double> operator[](FeatureId id) const {
    return values[static_cast<std::size_t>(id)];
  }
  std::optional<double>& operator[](FeatureId id) { return values[static_cast<std::size_t>(id)]; }
};

struct Slot {
  Timestamp start;
  std::vector<PacketRecord> records;
};

/// Buckets a time-ordered trace into fixed-width slots. Empty slots are not
/// emitted. Throws std::invalid_argument if the width is not positive.
std::vector<Slot> slice_slots(std::span<const PacketRecord> trace, const SlotConfig& cfg);

SlotFeatureVector extract_features(std::span<const PacketRecord> records,
                                   const std::string& device_key, Timestamp slot_start = {},
                                   std::int64_t width_seconds = 0);

std::vector<SlotFeatureVector> extract_trace_features(const DeviceTrace& trace,
                                                      const SlotConfig& cfg);

struct TcpTsSample {
  double t = 0;  // arrival, seconds
  double v = 0;  // TSval
};

/// Root-mean-square residual of the ordinary least-squares line v = a*t + b.
/// Missing with fewer than two samples or when all t coincide.
std::optional<double> tcpts_lls_error(std::span<const TcpTsSample> samples);

void write_feature_csv(std::ostream& out, const std::vector<SlotFeatureVector>& rows);
/// Throws Error{SchemaError} with the offending line number.
std::vector<SlotFeatureVector> read_feature_csv(std::istream& in);

}  // namespace iotsense

#include "iotsense/demux.hpp"

#include <algorithm>
#include <map>

#include "iotsense/error.hpp"

namespace iotsense {

namespace {

void sort_records(std::vector<PacketRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const PacketRecord& a, const PacketRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
}

}  // namespace

std::vector<DeviceTrace> demux_by_device(const std::vector<DecodedFrame>& frames,
                                         const DeviceManifest& manifest) {
  if (manifest.empty()) throw Error(ErrorKind::EmptyManifest, "manifest has no devices");
  std::vector<DeviceTrace> traces;
  std::map<std::string, std::size_t> index;
  for (const auto& e : manifest.entries()) {
    index.emplace(e.mac, traces.size());
    traces.push_back({e.mac, e.label, {}});
  }
  for (const auto& f : frames) {
    auto attach = [&](const MacAddress& mac, Direction dir) {
      auto it = index.find(format_mac(mac));
      if (it == index.end()) return;
      PacketRecord r = f.record;
      r.device_key = it->first;
      r.direction = dir;
      traces[it->second].records.push_back(std::move(r));
    };
    attach(f.src_mac, Direction::Outgoing);
    if (f.dst_mac != f.src_mac) attach(f.dst_mac, Direction::Incoming);
  }
  for (auto& t : traces) sort_records(t.records);
  return traces;
}

std::vector<DeviceTrace> group_by_device(std::vector<PacketRecord> records,
                                         const DeviceManifest& manifest) {
  if (manifest.empty()) throw Error(ErrorKind::EmptyManifest, "manifest has no devices");
  std::vector<DeviceTrace> traces;
  std::map<std::string, std::size_t> index;
  for (const auto& e : manifest.entries()) {
    index.emplace(e.mac, traces.size());
    traces.push_back({e.mac, e.label, {}});
  }
  for (auto& r : records) {
    auto mac = parse_mac(r.device_key);
    if (!mac) continue;
    auto it = index.find(format_mac(*mac));
    if (it == index.end()) continue;
    r.device_key = it->first;
    traces[it->second].records.push_back(std::move(r));
  }
  for (auto& t : traces) sort_records(t.records);
  return traces;
}

}  // namespace iotsense

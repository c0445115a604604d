#include "doctest.h"

#include <map>
#include <random>

#include "iotsense/demux.hpp"
#include "iotsense/error.hpp"

using namespace iotsense;

namespace {

MacAddress m(std::uint8_t last) { return {2, 0, 0, 0, 0, last}; }

DecodedFrame frame(std::uint8_t src, std::uint8_t dst, std::int64_t us) {
  DecodedFrame f;
  f.src_mac = m(src);
  f.dst_mac = m(dst);
  f.record.timestamp = Timestamp{us};
  f.record.frame_len = 60;
  return f;
}

DeviceManifest manifest3() {
  return DeviceManifest({{"02:00:00:00:00:01", "a", DeviceClass::IoT},
                         {"02:00:00:00:00:02", "b", DeviceClass::NoT},
                         {"02:00:00:00:00:03", "c", DeviceClass::IoT}});
}

}  // namespace

TEST_CASE("frame to an unknown peer") {
  auto traces = demux_by_device({frame(1, 9, 5)}, manifest3());
  REQUIRE(traces.size() == 3);
  REQUIRE(traces[0].records.size() == 1);
  CHECK(traces[0].records[0].direction == Direction::Outgoing);
  CHECK(traces[0].records[0].device_key == "02:00:00:00:00:01");
  CHECK(traces[0].label == DeviceClass::IoT);
  CHECK(traces[1].records.empty());
  CHECK(traces[2].records.empty());
}

TEST_CASE("frame between two manifest devices") {
  auto traces = demux_by_device({frame(1, 2, 5)}, manifest3());
  REQUIRE(traces[0].records.size() == 1);
  REQUIRE(traces[1].records.size() == 1);
  CHECK(traces[0].records[0].direction == Direction::Outgoing);
  CHECK(traces[1].records[0].direction == Direction::Incoming);
  CHECK(traces[1].records[0].device_key == "02:00:00:00:00:02");
}

TEST_CASE("empty manifest") {
  CHECK_THROWS_AS(demux_by_device({frame(1, 2, 5)}, DeviceManifest{}), Error);
  try {
    demux_by_device({}, DeviceManifest{});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyManifest);
  }
}

TEST_CASE("random frames match a brute-force tally") {
  std::mt19937_64 rng(11);
  std::vector<DecodedFrame> frames;
  for (int i = 0; i < 100; ++i) {
    auto src = static_cast<std::uint8_t>(rng() % 6);
    auto dst = static_cast<std::uint8_t>(rng() % 6);
    frames.push_back(frame(src, dst, static_cast<std::int64_t>(rng() % 1000)));
  }
  std::map<std::pair<int, Direction>, int> tally;
  for (const auto& f : frames) {
    if (f.src_mac[5] >= 1 && f.src_mac[5] <= 3) ++tally[{f.src_mac[5], Direction::Outgoing}];
    // A device talking to itself is recorded once, as Outgoing.
    if (f.dst_mac[5] >= 1 && f.dst_mac[5] <= 3 && f.dst_mac != f.src_mac) ++tally[{f.dst_mac[5], Direction::Incoming}];
  }
  auto traces = demux_by_device(frames, manifest3());
  for (int d = 1; d <= 3; ++d) {
    const auto& t = traces[d - 1];
    int out = 0, in = 0;
    for (const auto& r : t.records) (r.direction == Direction::Outgoing ? out : in)++;
    CHECK(out == tally[{d, Direction::Outgoing}]);
    CHECK(in == tally[{d, Direction::Incoming}]);
    for (std::size_t i = 1; i < t.records.size(); ++i)
      CHECK(t.records[i - 1].timestamp <= t.records[i].timestamp);
  }
}

TEST_CASE("group_by_device keeps manifest devices only") {
  std::vector<PacketRecord> rs(4);
  rs[0].device_key = "02:00:00:00:00:03";
  rs[0].timestamp = Timestamp{9};
  rs[1].device_key = "02:00:00:00:00:09";
  rs[2].device_key = "02:00:00:00:00:03";
  rs[2].timestamp = Timestamp{1};
  rs[3].device_key = "02-00-00-00-00-01";
  auto traces = group_by_device(rs, manifest3());
  REQUIRE(traces.size() == 3);
  CHECK(traces[0].records.size() == 1);
  CHECK(traces[1].records.empty());
  REQUIRE(traces[2].records.size() == 2);
  CHECK(traces[2].records[0].timestamp.micros == 1);
}

TEST_CASE("manifest parsing") {
  CHECK_THROWS_AS(DeviceManifest({{"02:00:00:00:00:01", "a", DeviceClass::IoT},
                                  {"02:00:00:00:00:01", "b", DeviceClass::NoT}}),
                  Error);
  CHECK_THROWS_AS(DeviceManifest({{"nope", "a", DeviceClass::IoT}}), Error);
  auto man = DeviceManifest({{"02:AA:00:00:00:01", "a", DeviceClass::IoT}});
  CHECK(man.entries()[0].mac == "02:aa:00:00:00:01");
  CHECK(man.find("02-aa-00-00-00-01") != nullptr);
}

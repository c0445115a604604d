#include "doctest.h"

#include <algorithm>
#include <random>

#include "iotsense/error.hpp"
#include "iotsense/unified.hpp"
#include "support/vote_oracle.hpp"

using namespace iotsense;

namespace {

const char* kVoters[] = {"m5_0", "m5_1", "m5_2", "m5_3", "m10_0", "m10_1", "m20"};

std::vector<Vote> votes_of(const std::vector<Verdict>& traffic, Verdict dhcp) {
  std::vector<Vote> v;
  for (std::size_t i = 0; i < 7; ++i) v.push_back({kVoters[i], traffic[i], traffic[i] == Verdict::Abstain ? 0 : 1});
  v.push_back({"dhcp", dhcp, dhcp == Verdict::Abstain ? 0 : 2});
  return v;
}

// IoT iff the largest outgoing window is below 20000; silence scores NoT.
LinearModel window_model(std::int64_t width) {
  LinearModel m;
  m.features = {FeatureId::max_tcp_window};
  m.theta = {0.0, -1.0};
  m.mu = {20000};
  m.sigma = {1};
  m.defaults = {20000};
  m.slot_width = width;
  return m;
}

PacketRecord tcp_at(std::int64_t s, std::uint16_t window) {
  PacketRecord r;
  r.device_key = "02:00:00:00:00:01";
  r.timestamp = Timestamp::from_seconds(s);
  r.frame_len = 60;
  r.ip = IpInfo{4, 64, 20, "192.168.1.10", "1.1.1.1", Transport::TCP, 6};
  r.tcp = TcpInfo{40000, 443, window, std::nullopt};
  return r;
}

}  // namespace

TEST_CASE("unanimous traffic without dhcp") {
  std::vector<Verdict> t(7, Verdict::IoT);
  auto r = combine_votes(votes_of(t, Verdict::Abstain));
  CHECK(r.iot_weight == 7);
  CHECK(r.not_weight == 0);
  CHECK(r.verdict == Verdict::IoT);
}

TEST_CASE("dhcp outweighs a narrow traffic majority") {
  std::vector<Verdict> t = {Verdict::IoT, Verdict::IoT, Verdict::NoT, Verdict::NoT,
                            Verdict::IoT, Verdict::NoT, Verdict::IoT};
  auto r = combine_votes(votes_of(t, Verdict::NoT));
  CHECK(r.iot_weight == 4);
  CHECK(r.not_weight == 5);
  CHECK(r.verdict == Verdict::NoT);
}

TEST_CASE("ties go to the 20-minute voter") {
  std::vector<Verdict> t = {Verdict::Abstain, Verdict::IoT, Verdict::NoT, Verdict::NoT,
                            Verdict::IoT, Verdict::NoT, Verdict::IoT};
  auto r = combine_votes(votes_of(t, Verdict::Abstain));
  CHECK(r.iot_weight == 3);
  CHECK(r.not_weight == 3);
  CHECK(r.verdict == Verdict::IoT);
  t[6] = Verdict::NoT;
  t[5] = Verdict::IoT;
  CHECK(combine_votes(votes_of(t, Verdict::Abstain)).verdict == Verdict::NoT);
}

TEST_CASE("abstaining voters carry no weight") {
  std::vector<Vote> v = {{"m20", Verdict::IoT, 1}, {"m5_0", Verdict::Abstain, 5}, {"dhcp", Verdict::Abstain, 2}};
  auto r = combine_votes(v);
  CHECK(r.votes[1].weight == 0);
  CHECK(r.votes[2].weight == 0);
  CHECK(r.iot_weight == 1);
}

TEST_CASE("all voter configurations follow the arithmetic rule") {
  const Verdict all[] = {Verdict::IoT, Verdict::NoT, Verdict::Abstain};
  std::mt19937_64 rng(1);
  int checked = 0;
  for (int code = 0; code < 2187; ++code) {
    std::vector<Verdict> t(7);
    int c = code;
    for (auto& v : t) {
      v = all[c % 3];
      c /= 3;
    }
    for (Verdict d : all) {
      auto votes = votes_of(t, d);
      auto r = combine_votes(votes);
      CHECK(r.verdict == testsupport::vote_oracle(t, d));
      std::shuffle(votes.begin(), votes.end(), rng);
      CHECK(combine_votes(votes).verdict == r.verdict);
      bool none_abstain = d != Verdict::Abstain &&
                          std::none_of(t.begin(), t.end(), [](Verdict v) { return v == Verdict::Abstain; });
      if (none_abstain) CHECK(r.iot_weight != r.not_weight);
      ++checked;
    }
  }
  CHECK(checked == 6561);
}

TEST_CASE("unified prediction over a window") {
  auto m5 = window_model(300), m10 = window_model(600), m20 = window_model(1200);
  std::vector<LabelSet> sets = {{"prl:12"}, {"prl:12", "x"}, {"x"}, {}};
  std::vector<DeviceClass> y = {DeviceClass::IoT, DeviceClass::IoT, DeviceClass::NoT, DeviceClass::NoT};
  auto dhcp = train_dhcp_classifier(sets, y);
  UnifiedModels models{&m5, &m10, &m20, &dhcp};
  const std::int64_t w0 = 1'700'000'400;

  // Small windows in every 5-minute slot.
  std::vector<PacketRecord> calm = {tcp_at(w0 + 10, 1000), tcp_at(w0 + 310, 1000),
                                    tcp_at(w0 + 610, 1000), tcp_at(w0 + 910, 1000)};
  auto r = unified_predict(calm, Timestamp::from_seconds(w0), models, LabelSet{"x"});
  CHECK(r.votes.size() == 8);
  CHECK(r.iot_weight == 7);
  CHECK(r.not_weight == 2);
  CHECK(r.verdict == Verdict::IoT);

  // Only the first 5 minutes are active: three voters say IoT, the other
  // 5-minute voters abstain.
  std::vector<PacketRecord> brief = {tcp_at(w0 + 10, 1000)};
  auto b = unified_predict(brief, Timestamp::from_seconds(w0), models, LabelSet{"x"});
  CHECK(b.iot_weight == 3);
  CHECK(b.not_weight == 2);
  CHECK(b.verdict == Verdict::IoT);
  auto b2 = unified_predict(brief, Timestamp::from_seconds(w0), models, std::nullopt);
  CHECK(b2.votes.back().verdict == Verdict::Abstain);

  CHECK(unified_predict({}, Timestamp::from_seconds(w0), models, LabelSet{"prl:12"}).verdict ==
        Verdict::Abstain);

  UnifiedModels wrong{&m10, &m10, &m20, nullptr};
  try {
    unified_predict(calm, Timestamp::from_seconds(w0), wrong, std::nullopt);
    FAIL("expected ModelWidthMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ModelWidthMismatch);
  }
}

TEST_CASE("unanimous models decide the window") {
  auto m5 = window_model(300), m10 = window_model(600), m20 = window_model(1200);
  std::vector<LabelSet> sets = {{"prl:12"}, {"x"}};
  std::vector<DeviceClass> y = {DeviceClass::IoT, DeviceClass::NoT};
  auto dhcp = train_dhcp_classifier(sets, y);
  UnifiedModels models{&m5, &m10, &m20, &dhcp};
  const std::int64_t w0 = 1'700'000'400;
  std::vector<PacketRecord> busy;
  for (int i = 0; i < 4; ++i) busy.push_back(tcp_at(w0 + 300 * i + 5, 60000));
  auto r = unified_predict(busy, Timestamp::from_seconds(w0), models, LabelSet{"x"});
  CHECK(r.verdict == Verdict::NoT);
  CHECK(r.not_weight == 9);
}

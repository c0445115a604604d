#include "iotsense/unified.hpp"

#include <stdexcept>

#include "iotsense/error.hpp"

namespace iotsense {

namespace {

constexpr std::string_view kTieBreaker = "m20";

Vote traffic_vote(std::span<const PacketRecord> window, Timestamp start, int index,
                  const LinearModel& model, const std::string& voter) {
  const std::int64_t width = model.slot_width * 1'000'000;
  const std::int64_t lo = start.micros + index * width;
  const std::int64_t hi = lo + width;
  std::vector<PacketRecord> slot;
  for (const auto& r : window) {
    if (r.timestamp.micros >= lo && r.timestamp.micros < hi) slot.push_back(r);
  }
  if (slot.empty()) return {voter, Verdict::Abstain, 0};
  auto features = extract_features(slot, slot.front().device_key, Timestamp{lo}, model.slot_width);
  return {voter, to_verdict(predict(model, features).verdict), 1};
}

}  // namespace

VoteRecord combine_votes(std::vector<Vote> votes) {
  VoteRecord rec;
  std::optional<Verdict> tie_breaker;
  for (auto& v : votes) {
    if (v.verdict == Verdict::Abstain) v.weight = 0;
    if (v.verdict == Verdict::IoT) rec.iot_weight += v.weight;
    if (v.verdict == Verdict::NoT) rec.not_weight += v.weight;
    if (v.voter == kTieBreaker) tie_breaker = v.verdict;
  }
  rec.votes = std::move(votes);
  // A silent 20-minute slot means no traffic in the whole window.
  if (!tie_breaker || *tie_breaker == Verdict::Abstain) {
    rec.verdict = Verdict::Abstain;
  } else if (rec.iot_weight != rec.not_weight) {
    rec.verdict = rec.iot_weight > rec.not_weight ? Verdict::IoT : Verdict::NoT;
  } else {
    rec.verdict = *tie_breaker;
  }
  return rec;
}

VoteRecord unified_predict(std::span<const PacketRecord> window_records, Timestamp window_start,
                           const UnifiedModels& models, const std::optional<LabelSet>& dhcp_labels,
                           const UnifiedConfig& cfg) {
  if (!models.m5 || !models.m10 || !models.m20)
    throw std::invalid_argument("unified_predict needs 5, 10 and 20 minute models");
  if (models.m5->slot_width != 300 || models.m10->slot_width != 600 ||
      models.m20->slot_width != kUnifiedWindow)
    throw Error(ErrorKind::ModelWidthMismatch,
                "unified classifier expects 300/600/1200 s models, got " +
                    std::to_string(models.m5->slot_width) + "/" +
                    std::to_string(models.m10->slot_width) + "/" +
                    std::to_string(models.m20->slot_width));
  if (window_start.micros % (kUnifiedWindow * 1'000'000) != 0)
    throw std::invalid_argument("window start is not aligned to 1200 s");
  if (cfg.dhcp_weight < 1) throw std::invalid_argument("dhcp weight must be at least 1");

  std::vector<Vote> votes;
  for (int i = 0; i < 4; ++i)
    votes.push_back(traffic_vote(window_records, window_start, i, *models.m5, "m5_" + std::to_string(i)));
  for (int i = 0; i < 2; ++i)
    votes.push_back(traffic_vote(window_records, window_start, i, *models.m10, "m10_" + std::to_string(i)));
  votes.push_back(traffic_vote(window_records, window_start, 0, *models.m20, "m20"));

  Vote dhcp{"dhcp", Verdict::Abstain, 0};
  if (models.dhcp && dhcp_labels) {
    dhcp.verdict = predict_device(*models.dhcp, dhcp_labels);
    dhcp.weight = cfg.dhcp_weight;
  }
  votes.push_back(dhcp);
  return combine_votes(std::move(votes));
}

nlohmann::ordered_json to_json(const VoteRecord& record) {
  auto votes = nlohmann::ordered_json::array();
  for (const auto& v : record.votes)
    votes.push_back({{"voter", v.voter}, {"verdict", to_string(v.verdict)}, {"weight", v.weight}});
  nlohmann::ordered_json j;
  j["votes"] = votes;
  j["iot_weight"] = record.iot_weight;
  j["not_weight"] = record.not_weight;
  j["verdict"] = to_string(record.verdict);
  return j;
}

}  // namespace iotsense

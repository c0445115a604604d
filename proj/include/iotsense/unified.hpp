#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "iotsense/dhcp_classifier.hpp"
#include "iotsense/linear_model.hpp"
#include "iotsense/verdict.hpp"

namespace iotsense {

inline constexpr std::int64_t kUnifiedWindow = 1200;

struct Vote {
  std::string voter;
  Verdict verdict = Verdict::Abstain;
  int weight = 0;  // 0 whenever the voter abstains
};

struct VoteRecord {
  std::vector<Vote> votes;
  int iot_weight = 0;
  int not_weight = 0;
  Verdict verdict = Verdict::Abstain;
};

struct UnifiedConfig {
  int dhcp_weight = 2;
};

/// Weighted majority. The voter named "m20" is the tie-breaker; if it
/// abstains the whole window abstains.
VoteRecord combine_votes(std::vector<Vote> votes);

struct UnifiedModels {
  const LinearModel* m5 = nullptr;
  const LinearModel* m10 = nullptr;
  const LinearModel* m20 = nullptr;
  const DhcpSignatureModel* dhcp = nullptr;  // optional
};

/// Votes four 5-minute, two 10-minute and one 20-minute traffic verdicts plus
/// the DHCP verdict over the 20-minute window starting at `window_start`.
/// `window_records` must all fall inside the window. Throws
/// Error{ModelWidthMismatch} if the models are not 300/600/1200 s wide or the
/// window is not aligned.
VoteRecord unified_predict(std::span<const PacketRecord> window_records, Timestamp window_start,
                           const UnifiedModels& models,
                           const std::optional<LabelSet>& dhcp_labels,
                           const UnifiedConfig& cfg = {});

nlohmann::ordered_json to_json(const VoteRecord& record);

}  // namespace iotsense

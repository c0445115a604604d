#pragma once

// Reference greedy chain: at each step every one-feature extension of the
// previous set is rescored on its own, sequentially, and the first best one
// in canonical order is taken.

#include <algorithm>
#include <map>
#include <vector>

#include "iotsense/selection.hpp"

namespace testsupport {

struct OracleChain {
  std::vector<std::vector<iotsense::FeatureId>> sets;
  std::vector<double> scores;
};

inline OracleChain exhaustive_chain(std::vector<iotsense::FeatureId> pool,
                                    std::span<const iotsense::LabeledSlot> slots,
                                    const iotsense::SelectionConfig& cfg) {
  using namespace iotsense;
  std::sort(pool.begin(), pool.end());
  std::vector<std::string> devices;
  for (const auto& s : slots) devices.push_back(s.device_key());
  auto folds = kfold_device_split(devices, cfg.k, cfg.seed);

  std::vector<FeatureId> screened;
  for (FeatureId f : pool) {
    std::vector<FeatureId> one{f};
    if (score_feature_set(one, slots, folds, cfg) > cfg.screen_threshold) screened.push_back(f);
  }
  const std::size_t m = screened.size();
  std::map<std::vector<FeatureId>, double> memo;
  auto score = [&](const std::vector<FeatureId>& set) {
    auto it = memo.find(set);
    if (it != memo.end()) return it->second;
    double v = score_feature_set(set, slots, folds, cfg);
    memo.emplace(set, v);
    return v;
  };

  OracleChain chain;
  if (m == 0) return chain;
  std::vector<FeatureId> current;
  std::vector<bool> used(m, false);
  double cur = -1;
  for (std::size_t step = 0; step < m; ++step) {
    std::size_t best = m;
    double best_score = -1;
    for (std::size_t i = 0; i < m; ++i) {
      if (used[i]) continue;
      auto cand = current;
      cand.push_back(screened[i]);
      double v = score(cand);
      if (v > best_score) {
        best_score = v;
        best = i;
      }
    }
    if (step > 0) {
      if (cur >= 1.0) break;
      if ((best_score - cur) / (1.0 - cur) < cfg.alpha) break;
    }
    used[best] = true;
    current.push_back(screened[best]);
    cur = best_score;
    chain.sets.push_back(current);
    chain.scores.push_back(cur);
  }
  return chain;
}

}  // namespace testsupport

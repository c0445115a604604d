#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "iotsense/features.hpp"
#include "iotsense/linear_model.hpp"

namespace iotsense {

struct SelectionConfig {
  std::size_t k = 5;
  double alpha = 0.01;
  double screen_threshold = 0.5;
  std::uint64_t seed = 0;
  std::int64_t slot_width = 600;
  LinearTrainOptions training;

  /// Throws std::invalid_argument when k < 2 or a threshold is out of range.
  void validate() const;
};

using Fold = std::vector<std::string>;

/// Shuffles the (sorted) device list with a seeded Fisher-Yates pass and deals
/// devices round-robin into k folds. Throws Error{TooFewDevices}.
std::vector<Fold> kfold_device_split(std::vector<std::string> devices, std::size_t k,
                                     std::uint64_t seed);

/// Mean over folds of the pooled test-slot F1 obtained by training on the
/// other folds' devices. A fold with undefined F1 contributes 0.
/// Throws Error{DegenerateFold} if a training side holds a single class.
double score_feature_set(std::span<const FeatureId> features, std::span<const LabeledSlot> slots,
                         const std::vector<Fold>& folds, const SelectionConfig& cfg);

struct ScoredSet {
  std::vector<FeatureId> features;
  double f1 = 0.0;
};

struct SelectionResult {
  std::int64_t slot_width = 0;
  std::vector<FeatureId> selected;
  std::vector<ScoredSet> trace;             // every set scored, in evaluation order
  std::vector<ScoredSet> chain;             // best set per greedy step
  std::map<FeatureId, double> screened;     // single-feature scores, whole pool
};

/// Relative gain of the next chain score over the current one; stop growing
/// when it is below alpha or the current score is already perfect.
bool accept_extension(double current, double next, double alpha);

/// Single-feature screening followed by greedy forward selection.
/// Throws Error{EmptyPoolAfterScreening}.
SelectionResult greedy_select(std::span<const FeatureId> pool, std::span<const LabeledSlot> slots,
                              const SelectionConfig& cfg);

nlohmann::ordered_json to_json(const SelectionResult& result);

}  // namespace iotsense

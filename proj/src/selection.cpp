#include "iotsense/selection.hpp"

#include <algorithm>
#include <future>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include "iotsense/error.hpp"
#include "iotsense/metrics.hpp"

namespace iotsense {

namespace {

std::string set_name(std::span<const FeatureId> features) {
  std::string s;
  for (FeatureId f : features) {
    if (!s.empty()) s += ',';
    s += feature_name(f);
  }
  return s;
}

// Scores each candidate set concurrently; results keep candidate order so the
// outcome does not depend on scheduling.
std::vector<double> score_all(const std::vector<std::vector<FeatureId>>& sets,
                              std::span<const LabeledSlot> slots, const std::vector<Fold>& folds,
                              const SelectionConfig& cfg) {
  std::vector<double> scores(sets.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), 16));
  for (std::size_t base = 0; base < sets.size(); base += workers) {
    std::vector<std::future<double>> pending;
    for (std::size_t i = base; i < std::min(sets.size(), base + workers); ++i) {
      pending.push_back(std::async(std::launch::async, [&, i] {
        return score_feature_set(sets[i], slots, folds, cfg);
      }));
    }
    for (std::size_t i = 0; i < pending.size(); ++i) scores[base + i] = pending[i].get();
  }
  return scores;
}

}  // namespace

void SelectionConfig::validate() const {
  if (k < 2) throw std::invalid_argument("fold count k must be at least 2");
  if (!(alpha >= 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in [0, 1)");
  if (!(screen_threshold >= 0 && screen_threshold <= 1))
    throw std::invalid_argument("screen threshold must lie in [0, 1]");
  if (slot_width <= 0) throw std::invalid_argument("slot width must be positive");
}

std::vector<Fold> kfold_device_split(std::vector<std::string> devices, std::size_t k,
                                     std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("fold count k must be at least 2");
  std::sort(devices.begin(), devices.end());
  devices.erase(std::unique(devices.begin(), devices.end()), devices.end());
  if (devices.size() < k)
    throw Error(ErrorKind::TooFewDevices, std::to_string(devices.size()) + " devices for " +
                                              std::to_string(k) + " folds");
  std::mt19937_64 rng(seed);
  for (std::size_t i = devices.size() - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(devices[i], devices[j]);
  }
  std::vector<Fold> folds(k);
  for (std::size_t p = 0; p < devices.size(); ++p) folds[p % k].push_back(devices[p]);
  return folds;
}

double score_feature_set(std::span<const FeatureId> features, std::span<const LabeledSlot> slots,
                         const std::vector<Fold>& folds, const SelectionConfig& cfg) {
  if (features.empty()) throw std::invalid_argument("feature set must not be empty");
  if (folds.empty()) throw std::invalid_argument("no folds given");
  double total = 0;
  for (std::size_t fi = 0; fi < folds.size(); ++fi) {
    std::set<std::string> test_devices(folds[fi].begin(), folds[fi].end());
    std::vector<LabeledSlot> train, test;
    for (const auto& s : slots) (test_devices.count(s.device_key()) ? test : train).push_back(s);

    bool pos = false, neg = false;
    for (const auto& s : train) (s.label == DeviceClass::IoT ? pos : neg) = true;
    if (!pos || !neg)
      throw Error(ErrorKind::DegenerateFold,
                  "fold " + std::to_string(fi) + " trains on a single class");

    LinearModel model;
    try {
      model = train_linear_model(train, features, cfg.slot_width, cfg.training);
    } catch (const Error& e) {
      // A feature never observed on the training side carries no signal.
      if (e.kind() == ErrorKind::AllMissing) continue;
      throw;
    }
    Confusion c;
    for (const auto& s : test) c.add(s.label, predict(model, s.features).verdict);
    total += compute_metrics(c).f1.value_or(0.0);
  }
  return total / static_cast<double>(folds.size());
}

bool accept_extension(double current, double next, double alpha) {
  if (current >= 1.0) return false;
  return (next - current) / (1.0 - current) >= alpha;
}

SelectionResult greedy_select(std::span<const FeatureId> pool, std::span<const LabeledSlot> slots,
                              const SelectionConfig& cfg) {
  cfg.validate();
  std::vector<FeatureId> candidates(pool.begin(), pool.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<std::string> devices;
  for (const auto& s : slots) devices.push_back(s.device_key());
  auto folds = kfold_device_split(devices, cfg.k, cfg.seed);

  SelectionResult result;
  result.slot_width = cfg.slot_width;

  std::vector<std::vector<FeatureId>> singles;
  for (FeatureId f : candidates) singles.push_back({f});
  auto single_scores = score_all(singles, slots, folds, cfg);
  std::vector<FeatureId> screened;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    result.screened[candidates[i]] = single_scores[i];
    result.trace.push_back({singles[i], single_scores[i]});
    if (single_scores[i] > cfg.screen_threshold) screened.push_back(candidates[i]);
  }
  if (screened.empty())
    throw Error(ErrorKind::EmptyPoolAfterScreening,
                "no feature scored above " + std::to_string(cfg.screen_threshold));

  // Strict '>' keeps the earliest feature in canonical order on ties.
  FeatureId first = screened.front();
  for (FeatureId f : screened) {
    if (result.screened[f] > result.screened[first]) first = f;
  }
  std::vector<FeatureId> current{first};
  double current_score = result.screened[first];
  result.chain.push_back({current, current_score});
  std::vector<FeatureId> remaining;
  for (FeatureId f : screened) {
    if (f != first) remaining.push_back(f);
  }

  while (!remaining.empty() && current_score < 1.0) {
    std::vector<std::vector<FeatureId>> sets;
    for (FeatureId f : remaining) {
      sets.push_back(current);
      sets.back().push_back(f);
    }
    auto scores = score_all(sets, slots, folds, cfg);
    std::size_t best = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      result.trace.push_back({sets[i], scores[i]});
      if (scores[i] > scores[best]) best = i;
    }
    if (!accept_extension(current_score, scores[best], cfg.alpha)) break;
    current = sets[best];
    current_score = scores[best];
    result.chain.push_back({current, current_score});
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  result.selected = current;
  return result;
}

nlohmann::ordered_json to_json(const SelectionResult& result) {
  nlohmann::ordered_json j;
  j["slot_width"] = result.slot_width;
  nlohmann::ordered_json screened = nlohmann::ordered_json::object();
  for (const auto& [f, score] : result.screened) screened[std::string(feature_name(f))] = score;
  j["screened"] = screened;
  auto chain = nlohmann::ordered_json::array();
  for (const auto& step : result.chain) {
    auto names = nlohmann::ordered_json::array();
    for (FeatureId f : step.features) names.push_back(feature_name(f));
    chain.push_back({{"set", names}, {"f1", step.f1}});
  }
  j["chain"] = chain;
  auto trace = nlohmann::ordered_json::array();
  for (const auto& s : result.trace) trace.push_back({{"set", set_name(s.features)}, {"f1", s.f1}});
  j["trace"] = trace;
  auto selected = nlohmann::ordered_json::array();
  for (FeatureId f : result.selected) selected.push_back(feature_name(f));
  j["selected"] = selected;
  return j;
}

}  // namespace iotsense

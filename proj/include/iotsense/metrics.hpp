#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "iotsense/manifest.hpp"
#include "iotsense/verdict.hpp"

namespace iotsense {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  void add(DeviceClass truth, DeviceClass predicted);
};

/// nullopt stands for an undefined ratio (zero denominator).
struct Metrics {
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> f1;
};

Metrics compute_metrics(const Confusion& c);
Metrics compute_metrics(double tp, double fp, double fn);

struct DevicePrediction {
  std::string device;
  DeviceClass truth = DeviceClass::IoT;
  Verdict verdict = Verdict::Abstain;
};

struct DeviceSuccess {
  DeviceClass truth = DeviceClass::IoT;
  std::size_t correct = 0;
  std::size_t decided = 0;   // non-abstaining predictions
  std::size_t total = 0;
  std::optional<double> rate;  // correct / decided
  double coverage = 0.0;       // decided / total
};

struct CdfPoint {
  double rate = 0.0;
  double fraction = 0.0;  // devices with rate <= this one
};

struct SuccessSummary {
  std::map<std::string, DeviceSuccess> per_device;
  std::vector<CdfPoint> cdf;
};

SuccessSummary per_device_success(const std::vector<DevicePrediction>& predictions);

struct EvaluationReport {
  Confusion pooled;
  Metrics pooled_metrics;
  std::size_t abstained = 0;
  /// Each device weighs one: its success rate is split into fractional
  /// TP/FN (IoT) or TN/FP (NoT) counts.
  Metrics device_averaged;
  std::optional<double> mean_device_success;
  SuccessSummary success;
};

EvaluationReport evaluate(const std::vector<DevicePrediction>& predictions);

nlohmann::ordered_json to_json(const EvaluationReport& report);

}  // namespace iotsense

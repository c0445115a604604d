#include "iotsense/metrics.hpp"

#include <algorithm>

namespace iotsense {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::IoT: return "IoT";
    case Verdict::NoT: return "NoT";
    case Verdict::Abstain: return "Abstain";
  }
  return "Abstain";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  if (text == "IoT") return Verdict::IoT;
  if (text == "NoT") return Verdict::NoT;
  if (text == "Abstain") return Verdict::Abstain;
  return std::nullopt;
}

void Confusion::add(DeviceClass truth, DeviceClass predicted) {
  if (truth == DeviceClass::IoT) (predicted == DeviceClass::IoT ? tp : fn) += 1;
  else (predicted == DeviceClass::IoT ? fp : tn) += 1;
}

Metrics compute_metrics(double tp, double fp, double fn) {
  Metrics m;
  if (tp + fn > 0) m.recall = tp / (tp + fn);
  if (tp + fp > 0) m.precision = tp / (tp + fp);
  if (m.recall && m.precision && *m.recall + *m.precision > 0)
    m.f1 = 2 * *m.recall * *m.precision / (*m.recall + *m.precision);
  return m;
}

Metrics compute_metrics(const Confusion& c) {
  return compute_metrics(static_cast<double>(c.tp), static_cast<double>(c.fp),
                         static_cast<double>(c.fn));
}

SuccessSummary per_device_success(const std::vector<DevicePrediction>& predictions) {
  SuccessSummary out;
  for (const auto& p : predictions) {
    auto& d = out.per_device[p.device];
    d.truth = p.truth;
    ++d.total;
    if (p.verdict == Verdict::Abstain) continue;
    ++d.decided;
    if (p.verdict == to_verdict(p.truth)) ++d.correct;
  }
  std::vector<double> rates;
  for (auto& [_, d] : out.per_device) {
    d.coverage = static_cast<double>(d.decided) / static_cast<double>(d.total);
    if (d.decided > 0) {
      d.rate = static_cast<double>(d.correct) / static_cast<double>(d.decided);
      rates.push_back(*d.rate);
    }
  }
  std::sort(rates.begin(), rates.end());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (i + 1 < rates.size() && rates[i + 1] == rates[i]) continue;
    out.cdf.push_back({rates[i], static_cast<double>(i + 1) / static_cast<double>(rates.size())});
  }
  return out;
}

EvaluationReport evaluate(const std::vector<DevicePrediction>& predictions) {
  EvaluationReport r;
  for (const auto& p : predictions) {
    if (p.verdict == Verdict::Abstain) {
      ++r.abstained;
      continue;
    }
    r.pooled.add(p.truth, p.verdict == Verdict::IoT ? DeviceClass::IoT : DeviceClass::NoT);
  }
  r.pooled_metrics = compute_metrics(r.pooled);
  r.success = per_device_success(predictions);

  double tp = 0, fp = 0, fn = 0, rate_sum = 0;
  std::size_t rated = 0;
  for (const auto& [_, d] : r.success.per_device) {
    if (!d.rate) continue;
    ++rated;
    rate_sum += *d.rate;
    if (d.truth == DeviceClass::IoT) {
      tp += *d.rate;
      fn += 1 - *d.rate;
    } else {
      fp += 1 - *d.rate;
    }
  }
  r.device_averaged = compute_metrics(tp, fp, fn);
  if (rated > 0) r.mean_device_success = rate_sum / static_cast<double>(rated);
  return r;
}

namespace {

nlohmann::ordered_json opt(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json metrics_json(const Metrics& m) {
  return {{"recall", opt(m.recall)}, {"precision", opt(m.precision)}, {"f1", opt(m.f1)}};
}

}  // namespace

nlohmann::ordered_json to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["confusion"] = {{"tp", report.pooled.tp},
                    {"fp", report.pooled.fp},
                    {"tn", report.pooled.tn},
                    {"fn", report.pooled.fn}};
  j["abstained"] = report.abstained;
  j["recall"] = opt(report.pooled_metrics.recall);
  j["precision"] = opt(report.pooled_metrics.precision);
  j["f1"] = opt(report.pooled_metrics.f1);
  j["device_averaged"] = metrics_json(report.device_averaged);
  j["mean_device_success"] = opt(report.mean_device_success);
  auto devices = nlohmann::ordered_json::object();
  for (const auto& [name, d] : report.success.per_device) {
    devices[name] = {{"truth", to_string(d.truth)},
                     {"correct", d.correct},
                     {"decided", d.decided},
                     {"total", d.total},
                     {"rate", opt(d.rate)},
                     {"coverage", d.coverage}};
  }
  j["per_device"] = devices;
  auto cdf = nlohmann::ordered_json::array();
  for (const auto& p : report.success.cdf) cdf.push_back({p.rate, p.fraction});
  j["cdf"] = cdf;
  return j;
}

}  // namespace iotsense

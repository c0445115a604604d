#pragma once

// Label-set generator for the rule
//   IoT iff prl:12, else NoT iff prl:15 or dhcpcd, else IoT
// with irrelevant labels sprinkled in at 10%.

#include <random>
#include <vector>

#include "iotsense/dhcp_classifier.hpp"

namespace testsupport {

struct DhcpRows {
  std::vector<iotsense::LabelSet> sets;
  std::vector<iotsense::DeviceClass> labels;
};

inline iotsense::DeviceClass dhcp_rule(const iotsense::LabelSet& s) {
  if (s.count("prl:12")) return iotsense::DeviceClass::IoT;
  if (s.count("prl:15") || s.count("dhcpcd")) return iotsense::DeviceClass::NoT;
  return iotsense::DeviceClass::IoT;
}

inline DhcpRows dhcp_rule_rows(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> kNoise = {"android", "linux", "msft",    "udhcp",
                                                  "prl:28",  "prl:42", "maxsz:576", "msg:3"};
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution half(0.5), tenth(0.1);
  DhcpRows rows;
  for (std::size_t i = 0; i < n; ++i) {
    iotsense::LabelSet s = {"prl:1", "prl:3", "prl:6", "msg:1"};
    if (half(rng)) s.insert("prl:12");
    if (half(rng)) s.insert("prl:15");
    if (half(rng)) s.insert("dhcpcd");
    for (const auto& l : kNoise) {
      if (tenth(rng)) s.insert(l);
    }
    rows.labels.push_back(dhcp_rule(s));
    rows.sets.push_back(std::move(s));
  }
  return rows;
}

}  // namespace testsupport

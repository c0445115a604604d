#pragma once

#include <optional>
#include <string_view>

#include "iotsense/manifest.hpp"

namespace iotsense {

enum class Verdict { IoT, NoT, Abstain };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view text);

inline Verdict to_verdict(DeviceClass c) {
  return c == DeviceClass::IoT ? Verdict::IoT : Verdict::NoT;
}

}  // namespace iotsense

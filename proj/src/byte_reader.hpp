#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace iotsense::detail {

inline std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>((b[off] << 8) | b[off + 1]);
}

inline std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

inline std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off + 3]} << 24) | (std::uint32_t{b[off + 2]} << 16) |
         (std::uint32_t{b[off + 1]} << 8) | std::uint32_t{b[off]};
}

}  // namespace iotsense::detail

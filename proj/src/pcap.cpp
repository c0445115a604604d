#include "iotsense/pcap.hpp"

#include <fstream>
#include <iterator>

#include "byte_reader.hpp"
#include "iotsense/error.hpp"

namespace iotsense {

namespace {

constexpr std::size_t kGlobalHeader = 24;
constexpr std::size_t kRecordHeader = 16;
constexpr std::uint32_t kLinkEthernet = 1;

}  // namespace

std::vector<RawFrame> parse_pcap(std::span<const std::uint8_t> data) {
  if (data.size() < 4) throw Error(ErrorKind::BadMagic, "input shorter than a pcap magic");

  bool big_endian = false;
  bool nanos = false;
  switch (detail::be32(data, 0)) {
    case 0xa1b2c3d4: big_endian = true; break;
    case 0xd4c3b2a1: break;
    case 0xa1b23c4d: big_endian = true; nanos = true; break;
    case 0x4d3cb2a1: nanos = true; break;
    default: throw Error(ErrorKind::BadMagic, "unrecognized pcap magic");
  }
  auto u32 = [big_endian](std::span<const std::uint8_t> b, std::size_t off) {
    return big_endian ? detail::be32(b, off) : detail::le32(b, off);
  };

  if (data.size() < kGlobalHeader)
    throw Error(ErrorKind::TruncatedHeader, "pcap global header is shorter than 24 bytes");
  std::uint32_t linktype = u32(data, 20) & 0x0fffffff;
  if (linktype != kLinkEthernet)
    throw Error(ErrorKind::UnsupportedLinkType, "link type " + std::to_string(linktype));

  std::vector<RawFrame> frames;
  std::size_t off = kGlobalHeader;
  while (off < data.size()) {
    if (data.size() - off < kRecordHeader)
      throw Error(ErrorKind::TruncatedHeader,
                  "record header at offset " + std::to_string(off) + " is truncated");
    std::uint32_t sec = u32(data, off);
    std::uint32_t frac = u32(data, off + 4);
    std::uint32_t caplen = u32(data, off + 8);
    std::uint32_t origlen = u32(data, off + 12);
    off += kRecordHeader;
    if (data.size() - off < caplen)
      throw Error(ErrorKind::TruncatedRecord, "record declares " + std::to_string(caplen) +
                                                  " bytes but " + std::to_string(data.size() - off) +
                                                  " remain");
    RawFrame f;
    std::int64_t micros = nanos ? (std::int64_t{frac} + 500) / 1000 : std::int64_t{frac};
    f.timestamp = Timestamp{std::int64_t{sec} * 1'000'000 + micros};
    f.orig_len = origlen;
    f.bytes.assign(data.begin() + static_cast<std::ptrdiff_t>(off),
                   data.begin() + static_cast<std::ptrdiff_t>(off + caplen));
    frames.push_back(std::move(f));
    off += caplen;
  }
  return frames;
}

std::vector<RawFrame> read_pcap_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_pcap(bytes);
}

}  // namespace iotsense

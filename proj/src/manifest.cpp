#include "iotsense/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "iotsense/error.hpp"
#include "iotsense/packet.hpp"

namespace iotsense {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string_view to_string(DeviceClass c) { return c == DeviceClass::IoT ? "IoT" : "NoT"; }

std::optional<DeviceClass> parse_device_class(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "iot") return DeviceClass::IoT;
  if (lower == "not") return DeviceClass::NoT;
  return std::nullopt;
}

DeviceManifest::DeviceManifest(std::vector<ManifestEntry> entries) : entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (auto& e : entries_) {
    auto mac = parse_mac(e.mac);
    if (!mac) throw Error(ErrorKind::ManifestError, "invalid MAC '" + e.mac + "'");
    e.mac = format_mac(*mac);
    if (!seen.insert(e.mac).second)
      throw Error(ErrorKind::ManifestError, "duplicate MAC " + e.mac);
  }
}

const ManifestEntry* DeviceManifest::find(std::string_view mac) const {
  auto parsed = parse_mac(mac);
  if (!parsed) return nullptr;
  auto key = format_mac(*parsed);
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const ManifestEntry& e) { return e.mac == key; });
  return it == entries_.end() ? nullptr : &*it;
}

DeviceManifest read_manifest(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<ManifestEntry> entries;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (!header_seen) {
      if (cells.size() != 3 || cells[0] != "mac" || cells[1] != "name" || cells[2] != "label")
        throw Error(ErrorKind::ManifestError, "line 1: expected header 'mac,name,label'");
      header_seen = true;
      continue;
    }
    if (cells.size() != 3)
      throw Error(ErrorKind::ManifestError,
                  "line " + std::to_string(line_no) + ": expected 3 columns");
    auto label = parse_device_class(cells[2]);
    if (!label)
      throw Error(ErrorKind::ManifestError,
                  "line " + std::to_string(line_no) + ": label must be IoT or NoT");
    entries.push_back({cells[0], cells[1], *label});
  }
  if (!header_seen) throw Error(ErrorKind::ManifestError, "missing header 'mac,name,label'");
  return DeviceManifest(std::move(entries));
}

DeviceManifest read_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_manifest(in);
}

}  // namespace iotsense

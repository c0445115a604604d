#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace iotsense {

enum class DeviceClass { IoT, NoT };

std::string_view to_string(DeviceClass c);
std::optional<DeviceClass> parse_device_class(std::string_view text);

struct ManifestEntry {
  std::string mac;  // canonical form
  std::string name;
  DeviceClass label = DeviceClass::IoT;
};

class DeviceManifest {
 public:
  DeviceManifest() = default;
  /// Throws Error{ManifestError} on duplicate or malformed MACs.
  explicit DeviceManifest(std::vector<ManifestEntry> entries);

  const std::vector<ManifestEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  const ManifestEntry* find(std::string_view mac) const;

 private:
  std::vector<ManifestEntry> entries_;
};

/// CSV with header `mac,name,label`; labels are case-insensitive.
DeviceManifest read_manifest(std::istream& in);
DeviceManifest read_manifest_file(const std::string& path);

}  // namespace iotsense

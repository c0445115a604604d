#pragma once

#include <string>
#include <vector>

#include "iotsense/decode.hpp"
#include "iotsense/manifest.hpp"
#include "iotsense/packet.hpp"

namespace iotsense {

struct DeviceTrace {
  std::string device_key;
  DeviceClass label = DeviceClass::IoT;
  std::vector<PacketRecord> records;  // sorted by timestamp
};

/// Attributes each frame to the manifest devices it touches: Outgoing for the
/// source MAC, Incoming for the destination MAC. Frames touching no manifest
/// device are dropped. One trace per manifest entry, in manifest order, even
/// when empty. Throws Error{EmptyManifest}.
std::vector<DeviceTrace> demux_by_device(const std::vector<DecodedFrame>& frames,
                                         const DeviceManifest& manifest);

/// Groups already-attributed records (e.g. from an event log) by device_key.
/// Keys are matched as MACs in canonical form; records whose device is not in
/// the manifest are dropped.
std::vector<DeviceTrace> group_by_device(std::vector<PacketRecord> records,
                                         const DeviceManifest& manifest);

}  // namespace iotsense

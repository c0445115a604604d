#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "iotsense/packet.hpp"

namespace iotsense {

/// One JSON object per line, keys named after PacketRecord fields; absent
/// optionals are omitted. Unknown keys and enum violations raise
/// Error{SchemaError} carrying the 1-based line number. Blank lines are
/// skipped.
std::vector<PacketRecord> parse_event_log(std::istream& in);
std::vector<PacketRecord> read_event_log_file(const std::string& path);

PacketRecord parse_event_line(std::string_view line, std::size_t line_no = 1);
std::string serialize_event(const PacketRecord& record);
void write_event_log(std::ostream& out, const std::vector<PacketRecord>& records);

}  // namespace iotsense

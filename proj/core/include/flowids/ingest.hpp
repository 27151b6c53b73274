#pragma once

#include <istream>
#include <string>
#include <vector>

#include "flowids/flow.hpp"

namespace flowids {

/// One data row of the packet CSV, before flow assembly.
struct PacketRecord {
  std::string flow_hint;  // optional precomputed flow id, empty = derive
  double timestamp = 0.0; // seconds
  FlowKey key;            // as written in the row (not canonicalized)
  double packet_length = 0.0;
  std::array<double, 9> flags{}; // fin..ns in canonical order
  Label label = Label::kBenign;
  std::string attack_type;
  bool fully_controlled = false;
  std::size_t line = 0;   // 1-based source line, for error messages
};

/// Parses the packet CSV format (see docs/FORMATS.md). Throws DataError
/// with the offending line number or column name.
std::vector<PacketRecord> parse_packet_csv(std::istream& in);
std::vector<PacketRecord> parse_packet_csv_file(const std::string& path);

/// Groups records into flows by flow_hint (when present) or by the
/// direction-insensitive 5-tuple, computes IAT and direction, and orders
/// packets by timestamp. First packet of a flow defines the forward
/// direction and gets IAT 0.
std::vector<Flow> assemble_flows(const std::vector<PacketRecord>& records);

}  // namespace flowids

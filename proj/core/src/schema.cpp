#include "flowids/schema.hpp"

#include "flowids/util.hpp"

namespace flowids {

FeatureSchema FeatureSchema::canonical() {
  FeatureSchema s;
  s.names = {"src_port", "dst_port", "protocol", "packet_length", "iat",
             "direction", "fin", "syn", "rst", "psh",
             "ack", "urg", "ece", "cwr", "ns"};
  s.flow_constant.assign(kNumFeatures, false);
  s.flow_constant[kSrcPort] = true;
  s.flow_constant[kDstPort] = true;
  s.flow_constant[kProtocol] = true;
  s.manipulable.assign(kNumFeatures, false);
  s.manipulable[kPacketLength] = true;
  s.manipulable[kIat] = true;
  s.active.assign(kNumFeatures, true);
  return s;
}

int FeatureSchema::active_count() const {
  int n = 0;
  for (bool a : active) n += a ? 1 : 0;
  return n;
}

std::vector<int> FeatureSchema::active_indices() const {
  std::vector<int> idx;
  for (std::size_t i = 0; i < active.size(); ++i)
    if (active[i]) idx.push_back(static_cast<int>(i));
  return idx;
}

int FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

void FeatureSchema::validate() const {
  if (names.size() != kNumFeatures) throw ConfigError("schema must have exactly 15 features");
  if (flow_constant.size() != names.size() || manipulable.size() != names.size() ||
      active.size() != names.size())
    throw ConfigError("schema mask arity mismatch");
  for (std::size_t i = 0; i < names.size(); ++i)
    if (flow_constant[i] && manipulable[i])
      throw ConfigError("feature '" + names[i] + "' cannot be both flow-constant and manipulable");
}

const char* reduction_name(Reduction r) {
  switch (r) {
    case Reduction::kNone: return "none";
    case Reduction::kBothDirections: return "both_directions";
    case Reduction::kAttackerDirectionOnly: return "attacker_direction_only";
  }
  return "?";
}

}  // namespace flowids

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "flowids/schema.hpp"

namespace flowids {

/// One packet's 15 features, stored in canonical order (see Feature).
struct PacketFeatureVector {
  std::array<double, kNumFeatures> f{};

  double& operator[](int i) { return f[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return f[static_cast<std::size_t>(i)]; }

  bool forward() const { return f[kDirection] == kDirForward; }

  bool operator==(const PacketFeatureVector&) const = default;
};

/// Direction-insensitive 5-tuple. Packets travelling either way between the
/// two endpoints share one key; "forward" is the direction of the first
/// packet seen.
struct FlowKey {
  std::string src_ip;
  std::string dst_ip;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = 0;

  bool operator==(const FlowKey&) const = default;
  std::string to_string() const;
};

enum class Label : std::uint8_t { kBenign = 0, kAttack = 1 };

struct Flow {
  FlowKey key;
  std::vector<PacketFeatureVector> packets;
  Label label = Label::kBenign;
  std::string attack_type;       // empty for benign flows
  bool fully_controlled = false; // botnet/backdoor style traffic

  std::size_t length() const { return packets.size(); }
  bool is_attack() const { return label == Label::kAttack; }

  bool operator==(const Flow&) const = default;
};

enum class SplitTag : std::uint8_t { kUnsplit = 0, kTrain = 1, kTest = 2 };

struct Dataset {
  std::vector<Flow> flows;
  FeatureSchema schema;
  SplitTag split_tag = SplitTag::kUnsplit;

  std::size_t flow_count() const { return flows.size(); }
  std::size_t packet_count() const;
  std::size_t count_label(Label l) const;
};

/// Selects the flows an analysis conditions on.
struct ClassFilter {
  enum Kind { kAll, kBenignOnly, kAttackOnly, kAttackType } kind = kAll;
  std::string attack_type;

  bool matches(const Flow& fl) const;

  static ClassFilter all() { return {kAll, {}}; }
  static ClassFilter benign() { return {kBenignOnly, {}}; }
  static ClassFilter attacks() { return {kAttackOnly, {}}; }
  static ClassFilter type(std::string t) { return {kAttackType, std::move(t)}; }

  /// Parses "all" / "benign" / "attack" / any other string as a type tag.
  static ClassFilter parse(const std::string& s);
  std::string to_string() const;
};

}  // namespace flowids

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace flowids {

/// Canonical per-packet feature indices. Order is part of every on-disk
/// format and must not change.
enum Feature : int {
  kSrcPort = 0,
  kDstPort,
  kProtocol,
  kPacketLength,
  kIat,
  kDirection,
  kFlagFin,
  kFlagSyn,
  kFlagRst,
  kFlagPsh,
  kFlagAck,
  kFlagUrg,
  kFlagEce,
  kFlagCwr,
  kFlagNs,
  kNumFeatures  // 15
};

constexpr double kDirForward = 0.0;
constexpr double kDirReverse = 1.0;

/// How the feature-reduction defense altered the schema.
enum class Reduction : std::uint8_t {
  kNone = 0,
  /// Manipulable features dropped from the input entirely.
  kBothDirections = 1,
  /// Manipulable features zeroed on forward-direction packets, kept on
  /// reverse-direction packets.
  kAttackerDirectionOnly = 2,
};

/// The feature list plus the masks everything downstream keys off:
/// which features are constant per flow, which ones an adversary can
/// manipulate, and which ones are still fed to the model.
struct FeatureSchema {
  std::vector<std::string> names;
  std::vector<bool> flow_constant;
  std::vector<bool> manipulable;
  std::vector<bool> active;
  Reduction reduction = Reduction::kNone;

  static FeatureSchema canonical();

  std::size_t feature_count() const { return names.size(); }
  int active_count() const;
  std::vector<int> active_indices() const;

  /// Index of a feature by canonical name, -1 if unknown.
  int index_of(const std::string& name) const;

  /// Throws ConfigError if the masks are inconsistent (wrong arity,
  /// overlapping flow-constant/manipulable sets).
  void validate() const;

  bool operator==(const FeatureSchema&) const = default;
};

const char* reduction_name(Reduction r);

}  // namespace flowids

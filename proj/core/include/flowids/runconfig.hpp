#pragma once

#include <cstdint>
#include <string>

#include "flowids/attacks.hpp"
#include "flowids/classifier.hpp"
#include "flowids/defenses.hpp"
#include "flowids/explain.hpp"
#include "flowids/robustness.hpp"
#include "flowids/synth.hpp"

namespace flowids {

/// One configuration file drives every subcommand; sections mirror the
/// module configs. Parsing rejects unknown keys with the offending path.
struct RunConfig {
  std::uint64_t seed = 1;

  struct Paths {
    std::string dataset;
    std::string model;
    std::string out_dir = "out";
  } paths;

  SynthConfig synth;
  TrainConfig train;
  AttackSettings attack;
  ArsSchedule ars;

  struct Explain {
    std::string method = "dropout";
    std::string feature = "packet_length";
    std::string class_filter = "attack";
    std::size_t step = 0;
    std::size_t grid_points = 40;
    int mi_bins = 16;
    std::uint64_t seed = 1;
  } explain;

  struct Defense {
    std::string mode = "advtrain"; // reduce-both | reduce-forward | advtrain
    AdvTrainConfig advtrain;
  } defense;

  int threads = 1;

  static RunConfig defaults();
  /// Throws ConfigError naming the offending key/value.
  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);

  std::string to_json_text() const;

  /// FNV-1a hash of the canonical JSON form; recorded in manifests.
  std::uint64_t config_hash() const;
};

/// Every run drops a manifest next to its outputs: what ran, with which
/// config hash and seed, reading/writing which files. Deliberately no
/// timestamps so reruns are byte-identical.
struct Manifest {
  std::string subcommand;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  std::string to_json_text() const;
};

void write_manifest(const std::string& out_dir, const Manifest& m);

}  // namespace flowids

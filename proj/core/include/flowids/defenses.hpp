#pragma once

#include <cstdint>
#include <vector>

#include "flowids/classifier.hpp"
#include "flowids/robustness.hpp"

namespace flowids {

enum class ReductionMode { kBothDirections, kAttackerDirectionOnly };

/// Feature-reduction defense: removes (or direction-zeroes) the
/// manipulable features from the schema; retraining then runs on the
/// reduced inputs.
FeatureSchema reduce_features(const FeatureSchema& schema, ReductionMode mode);

struct AdvTrainConfig {
  std::uint32_t cycles = 5;
  std::uint32_t epochs_per_cycle = 10;   // training epochs between refreshes
  std::uint32_t refresh_iters = 10;      // GD iterations per adversarial refresh
  std::uint32_t baseline_epochs = 10;    // plain training before the loop
  double kappa = 1.0;                    // CW tradeoff for sample generation
  double delta = -0.2;
  double refresh_lr = 0.01;
  std::uint32_t seed_iters = 1000;       // CW budget for the initial counterparts
  TrainConfig train;                     // architecture, lr, batch, seed
  ArsSchedule ars;                       // held-out ARS tracking schedule
  std::size_t ars_samples = 24;          // held-out attack sample count
  int threads = 1;
};

struct AdvTrainCyclePoint {
  std::uint32_t cycle = 0;               // 0 = baseline
  double kappa_reached = 0.0;
  double ars = 0.0;
  double adversarial_ratio = 0.0;
};

struct AdvTrainResult {
  Model baseline;
  Model hardened;
  std::vector<AdvTrainCyclePoint> trajectory;
  std::size_t augmented_size = 0;        // original + one counterpart per attack flow
  std::uint64_t train_passes = 0;        // epochs run in the alternating loop
  std::uint64_t adversarial_passes = 0;  // refresh iterations run
  MetricsReport baseline_metrics;        // clean held-out metrics
  MetricsReport hardened_metrics;
  std::vector<Flow> counterparts;          // final adversarial counterparts
  std::vector<std::size_t> counterpart_sources; // indices into the training set
};

/// Alternating adversarial training: one CW-derived counterpart per attack
/// flow (labeled attack), refreshed in place every epochs_per_cycle epochs
/// with refresh_iters projected gradient-descent iterations against the
/// current model. ARS on a fixed held-out attack subset is recorded after
/// every cycle. Throws DataError when the training set has no attack
/// flows.
AdvTrainResult adversarial_training(const Dataset& train_data, const Dataset& test_data,
                                    const NormalizationStats& stats, const AdvTrainConfig& config);

}  // namespace flowids

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowids/dataset.hpp"
#include "flowids/lstm.hpp"
#include "flowids/normalize.hpp"

namespace flowids {

/// A trained classifier: LSTM parameters bundled with the schema and
/// normalization stats it was trained under, so prediction and attacks can
/// reconstruct the exact input encoding.
struct Model {
  ModelParams params;
  FeatureSchema schema;
  NormalizationStats stats;
  bool feature_dropout = false;

  int expected_width() const;
};

/// Features to treat as missing for a whole flow (feature-dropout models
/// only). Indices are canonical feature ids.
using FeatureMask = std::set<int>;

/// Builds the model input tensor for one flow: active features z-scored,
/// attacker-direction reduction zeroing applied, and in dropout mode the
/// indicator columns appended (slot zeroed + indicator 1 for masked
/// features).
Matrix flow_to_input(const Flow& flow, const FeatureSchema& schema,
                     const NormalizationStats& stats, bool dropout_inputs,
                     const FeatureMask& mask = {});

struct TrainConfig {
  std::uint32_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  int layers = 3;
  int hidden = 64;
  bool feature_dropout = false;
  /// Per-feature drop probability; <= 0 means the 1/n default.
  double dropout_prob = -1.0;
  /// Training targets are y*(1-s)+(1-y)*s. Keeps logits at a finite
  /// equilibrium (~ln((1-s)/s)) instead of growing without bound on
  /// cleanly separable data; evaluation and the loss operation always use
  /// hard labels.
  double label_smoothing = 0.05;
  /// Stddev of seeded Gaussian noise added to the normalized inputs during
  /// training passes only. Smooths the learned surface between class
  /// clusters the way the sampling density of full-scale traffic does.
  double input_noise_std = 0.15;
};

struct EpochStats {
  std::uint32_t epoch = 0;
  double loss = 0.0;      // mean per-flow BCE over the training pass
  double accuracy = 0.0;  // flow-level accuracy over the same pass
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> history;
};

/// Deterministic under config.seed. Throws DataError on an empty dataset.
/// The dataset must carry fitted stats (train splits normally do via the
/// cache); pass them explicitly here.
TrainResult train(const Dataset& train_data, const NormalizationStats& stats,
                  const TrainConfig& config);

/// Feature-dropout training: input width doubled to 2n (feature slots +
/// missing indicators); per flow presentation each active feature is
/// independently dropped with probability 1/n for the whole flow.
TrainResult train_feature_dropout(const Dataset& train_data, const NormalizationStats& stats,
                                  const TrainConfig& config);

/// Continues training an existing (non-dropout) model for config.epochs
/// more epochs with a fresh optimizer state. Architecture fields of the
/// config are ignored in favor of the model's.
TrainResult resume_training(const Model& start, const Dataset& train_data,
                            const NormalizationStats& stats, const TrainConfig& config);

struct Prediction {
  std::vector<double> confidence; // per-step attack probability
  bool flow_attack = false;       // final-step confidence > 0.5
  double final_logit = 0.0;
};

/// Throws ConfigError if a mask is given for a non-dropout model.
Prediction predict_flow(const Model& model, const Flow& flow, const FeatureMask& mask = {});

/// Mean per-flow BCE of the model over a dataset (diagnostic).
double dataset_loss(const Model& model, const Dataset& data);

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::uint64_t total() const { return tp + fp + tn + fn; }
};

struct MetricSet {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double youden_j = 0.0;
  bool degenerate = false; // some denominator was empty and reported as 0
};

MetricSet metrics_from_counts(const ConfusionCounts& c);

struct MetricsReport {
  ConfusionCounts packet_counts;
  ConfusionCounts flow_counts;
  MetricSet packet;
  MetricSet flow;
};

/// Per-packet metrics over every step decision, per-flow metrics over
/// final-step decisions. Throws DataError on an empty dataset.
MetricsReport evaluate(const Model& model, const Dataset& data, const FeatureMask& mask = {});

}  // namespace flowids

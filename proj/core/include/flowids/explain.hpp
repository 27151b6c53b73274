#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowids/classifier.hpp"

namespace flowids {

enum class ImportanceMethod { kWeights, kPerturbation, kDropout, kMutualInformation };
const char* importance_method_name(ImportanceMethod m);

struct ImportanceEntry {
  int feature = 0;
  std::string name;
  double score = 0.0;
  double stderr_ = 0.0; // sampling error where applicable (perturbation)
};

struct ImportanceTable {
  ImportanceMethod method = ImportanceMethod::kWeights;
  std::vector<ImportanceEntry> entries; // one per active feature
};

/// Sum over all one-step paths from an input through the stacked gates to
/// the logit head of the absolute weight products; recurrent weights
/// excluded. Deterministic, comparison-only method.
ImportanceTable importance_weights(const Model& model);

/// Accuracy drop when a feature is resampled from its empirical marginal
/// (one draw per packet; per flow for flow-constant features).
ImportanceTable importance_perturbation(const Model& model, const Dataset& data,
                                        std::uint64_t seed);

/// Accuracy drop when a feature is masked via the missing-feature inputs.
/// Requires a feature-dropout model; throws ConfigError otherwise.
ImportanceTable importance_dropout(const Model& model, const Dataset& data);

/// Shared-information score between two features from base/single/pair
/// masked accuracies. Undefined (flagged) when the single drops are ~0.
struct SharedInfoScore {
  int feature_i = 0, feature_j = 0;
  double score = 0.0;
  bool defined = false;
  double acc_base = 0.0, acc_without_i = 0.0, acc_without_j = 0.0, acc_without_both = 0.0;
};

SharedInfoScore shared_info_from_accuracies(double acc_base, double acc_wo_i, double acc_wo_j,
                                            double acc_wo_both, double tol = 1e-4);
SharedInfoScore shared_info_score(const Model& model, const Dataset& data, int feature_i,
                                  int feature_j);

struct MICfg {
  int feature_bins = 16;  // quantile bins
  std::size_t min_pairs = 100;
};

/// Plug-in mutual information (bits) between a feature's per-step value
/// and the same step's binarized prediction, pooled over the dataset.
ImportanceTable sensitivity_mutual_information(const Model& model, const Dataset& data,
                                               const MICfg& cfg = {});

/// Plug-in MI in bits from a joint count table (rows x cols).
double mi_from_joint(const std::vector<std::vector<std::uint64_t>>& joint);

struct PDPPoint {
  double value = 0.0; // denormalized feature value
  double mean = 0.0;  // mean prediction in [0,1]
  double min = 0.0, max = 0.0;
};

struct PDPCurve {
  int feature = 0;
  std::string feature_name;
  std::string condition;           // class filter description
  std::optional<std::size_t> step; // sequential variant only
  std::vector<PDPPoint> points;
  std::size_t flows_used = 0;
};

/// Grid helper: n quantile-spaced points over the observed conditional
/// range of a feature, denormalized units.
std::vector<double> quantile_grid(const Dataset& data, const ClassFilter& filter, int feature,
                                  std::size_t points = 40);

/// Conditional PDP over a flow-constant feature: substitute w in every
/// packet of every conditioned flow, average the flow-level prediction.
/// Throws ConfigError for non-flow-constant features.
PDPCurve conditional_pdp(const Model& model, const Dataset& data, const ClassFilter& filter,
                         int feature, const std::vector<double>& grid);

/// Sequential PDP at step t: run each conditioned flow untouched to t-1,
/// substitute w at step t only, take the step-t prediction, average.
/// Throws DataError when no flow is long enough.
PDPCurve sequential_pdp(const Model& model, const Dataset& data, const ClassFilter& filter,
                        int feature, std::size_t step, const std::vector<double>& grid);

struct StepConfidence {
  std::size_t step = 0;
  double mean_confidence = 0.0;
  std::size_t count = 0; // flows with length > step
};

std::vector<StepConfidence> confidence_per_step(const Model& model, const Dataset& data,
                                                const ClassFilter& filter);

struct StepProfile {
  std::size_t step = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

/// Per-step mean +- std of a raw feature over the conditioned flows.
std::vector<StepProfile> feature_sequence_profile(const Dataset& data, const ClassFilter& filter,
                                                  int feature);

}  // namespace flowids

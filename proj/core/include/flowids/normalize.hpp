#pragma once

#include <vector>

#include "flowids/flow.hpp"
#include "flowids/matrix.hpp"

namespace flowids {

/// Z-score statistics over the 15 canonical features. Fitted on the
/// training split only; population standard deviation, clamped to 1 for
/// constant features so normalization never divides by zero.
struct NormalizationStats {
  std::vector<double> mean; // size kNumFeatures
  std::vector<double> std;  // size kNumFeatures, > 0

  bool operator==(const NormalizationStats&) const = default;
};

/// Population mean/std per feature over every packet of every flow.
/// Throws DataError on an empty dataset.
NormalizationStats fit_normalizer(const Dataset& train);

/// (x - mean) / std elementwise over all 15 features; rows are packets.
Matrix apply_normalizer(const NormalizationStats& stats, const Flow& flow);

/// Inverse of apply_normalizer. Throws DataError on shape mismatch.
Flow invert_normalizer(const NormalizationStats& stats, const Matrix& tensor, const Flow& like);

}  // namespace flowids

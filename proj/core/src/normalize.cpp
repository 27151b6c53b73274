#include "flowids/normalize.hpp"

#include <cmath>

#include "flowids/util.hpp"

namespace flowids {

NormalizationStats fit_normalizer(const Dataset& train) {
  const std::size_t n = train.packet_count();
  if (n == 0) throw DataError("fit_normalizer: empty dataset");

  NormalizationStats stats;
  stats.mean.assign(kNumFeatures, 0.0);
  stats.std.assign(kNumFeatures, 0.0);

  for (const auto& fl : train.flows)
    for (const auto& p : fl.packets)
      for (int j = 0; j < kNumFeatures; ++j) stats.mean[static_cast<std::size_t>(j)] += p[j];
  for (auto& m : stats.mean) m /= static_cast<double>(n);

  for (const auto& fl : train.flows)
    for (const auto& p : fl.packets)
      for (int j = 0; j < kNumFeatures; ++j) {
        const double d = p[j] - stats.mean[static_cast<std::size_t>(j)];
        stats.std[static_cast<std::size_t>(j)] += d * d;
      }
  for (auto& s : stats.std) {
    s = std::sqrt(s / static_cast<double>(n)); // population
    if (s == 0.0) s = 1.0;                     // constant feature
  }
  return stats;
}

Matrix apply_normalizer(const NormalizationStats& stats, const Flow& flow) {
  if (stats.mean.size() != kNumFeatures || stats.std.size() != kNumFeatures)
    throw DataError("apply_normalizer: stats dimension mismatch");
  Matrix m(flow.packets.size(), kNumFeatures);
  for (std::size_t t = 0; t < flow.packets.size(); ++t)
    for (int j = 0; j < kNumFeatures; ++j)
      m.at(t, static_cast<std::size_t>(j)) =
          (flow.packets[t][j] - stats.mean[static_cast<std::size_t>(j)]) /
          stats.std[static_cast<std::size_t>(j)];
  return m;
}

Flow invert_normalizer(const NormalizationStats& stats, const Matrix& tensor, const Flow& like) {
  if (tensor.cols != kNumFeatures || tensor.rows != like.packets.size())
    throw DataError("invert_normalizer: tensor dimension mismatch");
  Flow out = like;
  for (std::size_t t = 0; t < tensor.rows; ++t)
    for (int j = 0; j < kNumFeatures; ++j)
      out.packets[t][j] = tensor.at(t, static_cast<std::size_t>(j)) *
                              stats.std[static_cast<std::size_t>(j)] +
                          stats.mean[static_cast<std::size_t>(j)];
  return out;
}

}  // namespace flowids

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "flowids/flow.hpp"
#include "flowids/normalize.hpp"

namespace flowids {

/// Deterministic label-stratified 2:1 split. Throws DataError for fewer
/// than 3 flows or when either side would be empty.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, std::uint64_t seed);

/// Versioned binary dataset cache: schema + optional normalization stats +
/// flows, exact round trip. Layout in docs/FORMATS.md.
struct DatasetCache {
  Dataset dataset;
  std::optional<NormalizationStats> stats;
};

std::vector<std::uint8_t> serialize_dataset(const DatasetCache& cache);
DatasetCache deserialize_dataset(const std::vector<std::uint8_t>& bytes);

void save_dataset(const std::string& path, const DatasetCache& cache);
DatasetCache load_dataset(const std::string& path);

}  // namespace flowids

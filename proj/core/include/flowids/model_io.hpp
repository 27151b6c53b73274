#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowids/classifier.hpp"
#include "flowids/lstm.hpp"

namespace flowids {

/// Parameter container: magic, version, dimensions, metadata, flat array.
/// Round trip is bit-exact. Throws DataError on bad magic, version or
/// truncation.
std::vector<std::uint8_t> serialize_params(const ModelParams& params);
ModelParams deserialize_params(const std::vector<std::uint8_t>& bytes);

/// Full model file: parameters + schema + normalization stats. Layout in
/// docs/FORMATS.md.
std::vector<std::uint8_t> serialize_model(const Model& model);
Model deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

}  // namespace flowids

#pragma once

#include <cstdint>
#include <filesystem>

#include "astcost/surrogate.hpp"

namespace astcost::models {

struct Checkpoint {
  Surrogate model;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  bool log_target = false;
};

/// JSON header (spec, input dims, seed, epoch, parameter shapes) followed by
/// every parameter value flattened in declaration order. Values round-trip
/// bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws DataError on malformed files or shape disagreement.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace astcost::models

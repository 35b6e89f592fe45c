#pragma once

#include <filesystem>

#include "astcost/graph.hpp"

namespace astcost {

/// Reads `manifest.json` plus one JSON Lines record file per workload.
/// Record order within each file is preserved and workloads appear in
/// manifest order. Throws DataError naming the file and record index of the
/// first problem.
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes the manifest and record files; creates `dir` if needed. Graphs are
/// grouped by workload in manifest order, so a dataset that is already
/// grouped round-trips exactly. Output bytes depend only on the dataset.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace astcost

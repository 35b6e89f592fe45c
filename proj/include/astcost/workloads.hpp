#pragma once

#include <string>
#include <vector>

#include "astcost/graph.hpp"

namespace astcost {

/// The twelve unique Conv2D workloads of ResNet18 with their x86
/// configuration counts (6,852 in total).
const std::vector<WorkloadMeta>& resnet18_workloads();

/// Workloads used as given data in the cross-workload protocol.
const std::vector<std::string>& default_train_workloads();

}  // namespace astcost

#include "astcost/workloads.hpp"

namespace astcost {

const std::vector<WorkloadMeta>& resnet18_workloads() {
  // id, H, W, C_in, C_out, kernel, stride, padding, dilation, # configs
  static const std::vector<WorkloadMeta> table = {
      {"C1", 224, 224, 3, 64, {7, 7}, {2, 2}, {3, 3}, {1, 1}, 252},
      {"C2", 56, 56, 64, 64, {3, 3}, {1, 1}, {1, 1}, {1, 1}, 784},
      {"C3", 56, 56, 64, 64, {1, 1}, {1, 1}, {1, 1}, {1, 1}, 784},
      {"C4", 56, 56, 64, 128, {3, 3}, {2, 2}, {1, 1}, {1, 1}, 672},
      {"C5", 56, 56, 64, 128, {1, 1}, {2, 2}, {1, 1}, {1, 1}, 672},
      {"C6", 28, 28, 128, 128, {3, 3}, {1, 1}, {1, 1}, {1, 1}, 768},
      {"C7", 28, 28, 128, 256, {3, 3}, {2, 2}, {1, 1}, {1, 1}, 576},
      {"C8", 28, 28, 128, 256, {1, 1}, {2, 2}, {1, 1}, {1, 1}, 576},
      {"C9", 14, 14, 256, 256, {3, 3}, {1, 1}, {1, 1}, {1, 1}, 648},
      {"C10", 14, 14, 256, 512, {3, 3}, {2, 2}, {1, 1}, {1, 1}, 360},
      {"C11", 14, 14, 256, 512, {1, 1}, {2, 2}, {1, 1}, {1, 1}, 360},
      {"C12", 7, 7, 512, 512, {3, 3}, {1, 1}, {1, 1}, {1, 1}, 400},
  };
  return table;
}

const std::vector<std::string>& default_train_workloads() {
  static const std::vector<std::string> ids = {"C1", "C2", "C4", "C8", "C9", "C12"};
  return ids;
}

}  // namespace astcost

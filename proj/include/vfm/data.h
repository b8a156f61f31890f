// Copyright 2026 The vfm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VFM_DATA_H_
#define VFM_DATA_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vfm/dataset.h"
#include "vfm/partition.h"

namespace vfm {

struct DatasetSpec {
  Eigen::Index n = 1000;
  int d = 10;
  // Fraction of non-zero feature entries and of non-zero true weights.
  double sparsity = 1.0;
  // Half-width of the uniform label noise (linear task).
  double label_noise = 0.1;
  // Logit multiplier applied to the standardized score (logistic task).
  double logit_scale = 4.0;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  Dataset data;
  Eigen::VectorXd true_weights;
};

// Weights: exactly ceil(s*d) non-zeros, uniform on [-1,1], at random
// positions. Features: each entry non-zero with probability s, uniform on
// [-1,1]. Linear labels: clamp(x.w / |w|_1 + U(-noise, noise), -1, 1).
// Logistic labels: Bernoulli(sigmoid(logit_scale * x.w / sd(x.w))).
// Throws InputError when s*d < 1 or the spec is otherwise invalid.
SyntheticData GenSynthetic(const DatasetSpec& spec, TaskKind task);

struct IngestOptions {
  std::string label_column = "label";
  TaskKind task = TaskKind::kLinear;
  // Min-max scale features (and linear labels) to [-1,1]. When off, values
  // must already lie in the input domain.
  bool normalize = true;
  // Categorical columns with more distinct values are rejected.
  std::size_t max_categories = 128;
};

struct IngestResult {
  Dataset data;
  std::vector<std::string> feature_names;
  // n, d, per-column ranges and the one-hot encoding map.
  nlohmann::json metadata;
  std::vector<std::string> warnings;
};

// Reads a headed, comma-separated UTF-8 file. Numeric columns are min-max
// scaled; text columns are one-hot encoded (one feature per sorted distinct
// value). Rows with an empty or "?" cell are dropped. Logistic labels must
// take exactly two distinct values; the one sorting first maps to 0.
// Constant columns become 0 with a warning. Throws IngestionError with the
// row and column of the first offending cell.
IngestResult IngestCsv(const std::filesystem::path& path,
                       const IngestOptions& options);

// Writes features as f0..f{d-1} plus `label`, every value printed with
// round-trip precision.
void WriteCsv(const Dataset& data, const std::filesystem::path& path);

enum class SplitScheme { kEven, kExplicit };

// kEven: contiguous blocks (VerticalPartition::Even). kExplicit: validates
// the given 0-based index sets.
VerticalPartition VSplit(const Dataset& data, int num_parties,
                         SplitScheme scheme,
                         std::vector<std::vector<int>> explicit_sets = {});

// Seeded Fisher-Yates shuffle, then the first floor(ratio * n) rows train.
// Throws InputError when n < 5 or ratio is outside (0, 1).
std::pair<Dataset, Dataset> SplitTrainTest(const Dataset& data, double ratio,
                                           std::uint64_t seed);

}  // namespace vfm

#endif  // VFM_DATA_H_

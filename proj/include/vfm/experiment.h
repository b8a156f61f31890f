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

#ifndef VFM_EXPERIMENT_H_
#define VFM_EXPERIMENT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vfm/baselines.h"
#include "vfm/data.h"
#include "vfm/dp.h"
#include "vfm/protocol.h"

namespace vfm {

enum class Method { kFm, kDpsgd, kNonPrivate };
std::string_view MethodName(Method method);
Method ParseMethod(std::string_view name);

struct ExperimentConfig {
  TaskKind task = TaskKind::kLinear;
  // Synthetic data is regenerated for every replicate; a CSV path switches
  // to ingestion.
  DatasetSpec synthetic;
  std::optional<std::string> csv_path;
  std::string label_column = "label";
  bool normalize = true;
  std::string dataset_id;  // defaults to "synthetic" or the file stem

  int num_parties = 2;
  SplitScheme scheme = SplitScheme::kEven;
  std::vector<std::vector<int>> explicit_sets;

  std::vector<Epsilon> epsilons = {Epsilon(1.0)};
  BudgetMode budget_mode = BudgetMode::kTopDown;
  std::map<PartyId, double> party_budgets;  // bottom-up eps^k
  std::map<PartyPair, double> pair_budgets;  // bottom-up eps^kl

  std::vector<Method> methods = {Method::kFm, Method::kNonPrivate};
  SecureBackend backend = SecureBackend::kSecretSharing;
  NoiseMode noise_mode = NoiseMode::kCoefficientKeyed;
  SchedulerKind scheduler = SchedulerKind::kDeterministic;
  int replicates = 10;
  std::uint64_t seed = 1;
  double ridge_floor = -1.0;  // negative: 1e-4 * n
  double train_ratio = 0.8;
  SgdConfig sgd;  // epsilon is overridden per row
  int jobs = 1;   // replicates run concurrently

  // Throws InputError on an invalid combination.
  void Validate() const;
};

struct ResultRow {
  std::string dataset;
  Method method = Method::kFm;
  std::optional<Epsilon> epsilon;  // empty for the non-private model
  int num_parties = 1;
  std::string metric;  // "mse" or "accuracy"
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation over replicates
  double median = 0.0;
  double seconds = 0.0;  // mean wall time per replicate
  std::vector<double> values;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  nlohmann::json metadata;
  std::vector<std::string> warnings;
};

// For each replicate r the seed is DeriveSeed(seed, replicate domain, r):
// synthetic data is generated from it, the 80/20 split is drawn from it and
// every method runs on the training part and is scored on the test part.
// Rows are ordered by (method, epsilon) whatever the completion order.
// Errors carry the failing method and replicate and keep their type.
ExperimentResult RunExperiment(const ExperimentConfig& config);

struct SweepAxes {
  std::vector<int> parties;       // empty: the config's K
  std::vector<double> sparsity;   // empty: the config's s (synthetic only)
};

ExperimentResult RunSweep(const ExperimentConfig& config,
                          const SweepAxes& axes);

inline constexpr const char* kResultHeader =
    "dataset,method,epsilon,K,metric,mean,std,seconds";

void WriteResultsCsv(const std::vector<ResultRow>& rows, std::ostream& out);

// Round-trip decimal rendering used in tables.
std::string FormatNumber(double value);

// Median of a non-empty sample.
double Median(std::vector<double> values);

}  // namespace vfm

#endif  // VFM_EXPERIMENT_H_

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

#ifndef VFM_DATASET_H_
#define VFM_DATASET_H_

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace vfm {

enum class TaskKind { kLinear, kLogistic };

std::string_view TaskName(TaskKind task);
// Accepts "linear" or "logistic"; throws InputError otherwise.
TaskKind ParseTask(std::string_view name);

// One user's row: features in [-1,1], label in [-1,1] (linear) or {0,1}
// (logistic).
struct Record {
  std::vector<double> features;
  double label = 0.0;
};

// Throws InputError naming the offending feature when the record is outside
// the input domain of `task`.
void ValidateRecord(const Record& record, TaskKind task);

// Immutable, validated table of records. Features are stored column-major so
// each party's feature columns are contiguous.
class Dataset {
 public:
  Dataset(TaskKind task, Eigen::MatrixXd features, Eigen::VectorXd labels);

  static Dataset FromRecords(TaskKind task, std::span<const Record> records);

  TaskKind task() const { return task_; }
  Eigen::Index size() const { return features_.rows(); }
  Eigen::Index dim() const { return features_.cols(); }

  const Eigen::MatrixXd& features() const { return features_; }
  const Eigen::VectorXd& labels() const { return labels_; }

  Record record(Eigen::Index i) const;
  std::vector<Record> records() const;

  // Rows in the given order; indices may repeat.
  Dataset Rows(std::span<const Eigen::Index> rows) const;

  bool operator==(const Dataset& other) const;

 private:
  TaskKind task_;
  Eigen::MatrixXd features_;
  Eigen::VectorXd labels_;
};

}  // namespace vfm

#endif  // VFM_DATASET_H_

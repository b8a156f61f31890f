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

#include "vfm/dataset.h"

#include <cmath>
#include <string>

#include "vfm/errors.h"

namespace vfm {

std::string_view TaskName(TaskKind task) {
  return task == TaskKind::kLinear ? "linear" : "logistic";
}

TaskKind ParseTask(std::string_view name) {
  if (name == "linear") return TaskKind::kLinear;
  if (name == "logistic") return TaskKind::kLogistic;
  throw InputError("unknown task '" + std::string(name) +
                   "' (expected linear or logistic)");
}

namespace {

void CheckLabel(double label, TaskKind task, Eigen::Index row) {
  const bool ok = task == TaskKind::kLinear
                      ? std::isfinite(label) && std::abs(label) <= 1.0
                      : label == 0.0 || label == 1.0;
  if (!ok) {
    throw InputError("record " + std::to_string(row) + ": label " +
                     std::to_string(label) + " outside the " +
                     std::string(TaskName(task)) + " label range");
  }
}

void CheckFeature(double value, Eigen::Index row, Eigen::Index col) {
  if (!std::isfinite(value) || std::abs(value) > 1.0) {
    throw InputError("record " + std::to_string(row) + ": feature " +
                     std::to_string(col) + " = " + std::to_string(value) +
                     " outside [-1,1]");
  }
}

}  // namespace

void ValidateRecord(const Record& record, TaskKind task) {
  for (std::size_t a = 0; a < record.features.size(); ++a) {
    CheckFeature(record.features[a], 0, static_cast<Eigen::Index>(a));
  }
  CheckLabel(record.label, task, 0);
}

Dataset::Dataset(TaskKind task, Eigen::MatrixXd features,
                 Eigen::VectorXd labels)
    : task_(task), features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.rows() != labels_.size()) {
    throw InputError("feature rows (" + std::to_string(features_.rows()) +
                     ") and labels (" + std::to_string(labels_.size()) +
                     ") disagree");
  }
  for (Eigen::Index c = 0; c < features_.cols(); ++c) {
    for (Eigen::Index r = 0; r < features_.rows(); ++r) {
      CheckFeature(features_(r, c), r, c);
    }
  }
  for (Eigen::Index r = 0; r < labels_.size(); ++r) {
    CheckLabel(labels_[r], task_, r);
  }
}

Dataset Dataset::FromRecords(TaskKind task, std::span<const Record> records) {
  const Eigen::Index n = static_cast<Eigen::Index>(records.size());
  const Eigen::Index d =
      records.empty() ? 0 : static_cast<Eigen::Index>(records[0].features.size());
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Record& r = records[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(r.features.size()) != d) {
      throw InputError("record " + std::to_string(i) + " has " +
                       std::to_string(r.features.size()) +
                       " features, expected " + std::to_string(d));
    }
    for (Eigen::Index a = 0; a < d; ++a) x(i, a) = r.features[a];
    y[i] = r.label;
  }
  return Dataset(task, std::move(x), std::move(y));
}

Record Dataset::record(Eigen::Index i) const {
  Record r;
  r.features.resize(static_cast<std::size_t>(dim()));
  for (Eigen::Index a = 0; a < dim(); ++a) r.features[a] = features_(i, a);
  r.label = labels_[i];
  return r;
}

std::vector<Record> Dataset::records() const {
  std::vector<Record> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (Eigen::Index i = 0; i < size(); ++i) out.push_back(record(i));
  return out;
}

Dataset Dataset::Rows(std::span<const Eigen::Index> rows) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), dim());
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = features_.row(rows[i]);
    y[static_cast<Eigen::Index>(i)] = labels_[rows[i]];
  }
  return Dataset(task_, std::move(x), std::move(y));
}

bool Dataset::operator==(const Dataset& other) const {
  return task_ == other.task_ && features_.rows() == other.features_.rows() &&
         features_.cols() == other.features_.cols() &&
         features_ == other.features_ && labels_ == other.labels_;
}

}  // namespace vfm

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

#include "vfm/objective.h"

#include <cmath>
#include <string>

#include "vfm/errors.h"
#include "vfm/kernels.h"

namespace vfm {

std::size_t CoeffIndex::Flat(int d) const {
  switch (degree) {
    case 0:
      return 0;
    case 1:
      return 1 + static_cast<std::size_t>(a);
    default:
      return 1 + static_cast<std::size_t>(d) +
             static_cast<std::size_t>(a) * d + b;
  }
}

CoeffIndex CoeffIndex::FromFlat(std::size_t flat, int d) {
  if (flat >= CoefficientCount(d)) {
    throw InputError("coefficient position " + std::to_string(flat) +
                     " out of range for d=" + std::to_string(d));
  }
  if (flat == 0) return Constant();
  if (flat <= static_cast<std::size_t>(d)) return Linear(static_cast<int>(flat - 1));
  const std::size_t q = flat - 1 - d;
  return Quadratic(static_cast<int>(q / d), static_cast<int>(q % d));
}

std::string CoeffIndex::Name() const {
  switch (degree) {
    case 0:
      return "l0";
    case 1:
      return "l1[" + std::to_string(a) + "]";
    default:
      return "l2[" + std::to_string(a) + "," + std::to_string(b) + "]";
  }
}

PolyObjective PolyObjective::Zero(int d) {
  return {0.0, Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
}

double& PolyObjective::at(CoeffIndex index) {
  switch (index.degree) {
    case 0:
      return constant;
    case 1:
      return linear[index.a];
    default:
      return quadratic(index.a, index.b);
  }
}

double PolyObjective::at(CoeffIndex index) const {
  return const_cast<PolyObjective*>(this)->at(index);
}

std::vector<double> PolyObjective::Flatten() const {
  const int d = dim();
  std::vector<double> out(coefficient_count());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = at(CoeffIndex::FromFlat(k, d));
  }
  return out;
}

PolyObjective PolyObjective::Unflatten(std::span<const double> coeffs, int d) {
  if (coeffs.size() != CoefficientCount(d)) {
    throw InputError("expected " + std::to_string(CoefficientCount(d)) +
                     " coefficients, got " + std::to_string(coeffs.size()));
  }
  PolyObjective obj = Zero(d);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    obj.at(CoeffIndex::FromFlat(k, d)) = coeffs[k];
  }
  return obj;
}

double PolyObjective::Evaluate(const Eigen::VectorXd& w) const {
  return constant + linear.dot(w) + w.dot(quadratic * w);
}

PolyObjective& PolyObjective::operator+=(const PolyObjective& other) {
  if (other.dim() != dim()) {
    throw InputError("objective dimensions disagree: " + std::to_string(dim()) +
                     " vs " + std::to_string(other.dim()));
  }
  constant += other.constant;
  linear += other.linear;
  quadratic += other.quadratic;
  return *this;
}

CoefficientRecipe RecipeFor(TaskKind task, CoeffIndex index) {
  using Factor = CoefficientRecipe::Factor;
  const bool linear_task = task == TaskKind::kLinear;
  switch (index.degree) {
    case 0:
      if (!linear_task) {
        throw InputError("the logistic constant term is not data-dependent");
      }
      return {Factor{true, 0}, Factor{true, 0}, 1.0};
    case 1:
      return {Factor{true, 0}, Factor{false, index.a},
              linear_task ? -2.0 : 1.0};
    default:
      return {Factor{false, index.a}, Factor{false, index.b},
              linear_task ? 1.0 : kLogisticQuadratic};
  }
}

Eigen::VectorXd LabelColumn(TaskKind task, const Eigen::VectorXd& labels) {
  if (task == TaskKind::kLinear) return labels;
  return (kLogisticLinear - labels.array()).matrix();
}

namespace {

void CheckDim(const Record& record, int d) {
  if (static_cast<int>(record.features.size()) != d) {
    throw InputError("record has " + std::to_string(record.features.size()) +
                     " features, expected d=" + std::to_string(d));
  }
}

}  // namespace

PolyObjective LinearRecordCoeffs(const Record& record, int d) {
  CheckDim(record, d);
  ValidateRecord(record, TaskKind::kLinear);
  const double y = record.label;
  PolyObjective obj = PolyObjective::Zero(d);
  obj.constant = y * y;
  for (int a = 0; a < d; ++a) {
    obj.linear[a] = -2.0 * (y * record.features[a]);
    for (int b = 0; b < d; ++b) {
      obj.quadratic(a, b) = record.features[a] * record.features[b];
    }
  }
  return obj;
}

PolyObjective LogisticRecordCoeffs(const Record& record, int d) {
  CheckDim(record, d);
  ValidateRecord(record, TaskKind::kLogistic);
  const double u = kLogisticLinear - record.label;
  PolyObjective obj = PolyObjective::Zero(d);
  obj.constant = kLogisticConstant;
  for (int a = 0; a < d; ++a) {
    obj.linear[a] = u * record.features[a];
    for (int b = 0; b < d; ++b) {
      obj.quadratic(a, b) =
          kLogisticQuadratic * (record.features[a] * record.features[b]);
    }
  }
  return obj;
}

PolyObjective RecordCoeffs(const Record& record, TaskKind task, int d) {
  return task == TaskKind::kLinear ? LinearRecordCoeffs(record, d)
                                   : LogisticRecordCoeffs(record, d);
}

PolyObjective Aggregate(std::span<const Record> records, TaskKind task) {
  if (records.empty()) throw InputError("cannot aggregate an empty dataset");
  const int d = static_cast<int>(records.front().features.size());
  PolyObjective sum = PolyObjective::Zero(d);
  for (const Record& r : records) sum += RecordCoeffs(r, task, d);
  return sum;
}

PolyObjective Aggregate(const Dataset& data) {
  if (data.size() == 0) throw InputError("cannot aggregate an empty dataset");
  const Eigen::MatrixXd& x = data.features();
  const Eigen::VectorXd label = LabelColumn(data.task(), data.labels());
  PolyObjective obj;
  if (data.task() == TaskKind::kLinear) {
    obj.constant = kernels::Dot(kernels::Span(label), kernels::Span(label));
    obj.linear = -2.0 * kernels::CrossParallel(x, label);
    obj.quadratic = kernels::GramParallel(x);
  } else {
    obj.constant = kLogisticConstant * static_cast<double>(data.size());
    obj.linear = kernels::CrossParallel(x, label);
    obj.quadratic = kLogisticQuadratic * kernels::GramParallel(x);
  }
  return obj;
}

bool IsDataDependent(TaskKind task, CoeffIndex index) {
  return !(task == TaskKind::kLogistic && index.degree == 0);
}

double WorstCaseMagnitude(TaskKind task, CoeffIndex index) {
  if (task == TaskKind::kLinear) {
    // |y^2| <= 1, |2 y x_a| <= 2, |x_a x_b| <= 1.
    return index.degree == 1 ? 2.0 : 1.0;
  }
  switch (index.degree) {
    case 0:
      return 0.0;  // identical for every record
    case 1:
      return kLogisticLinear;  // |1/2 - y| = 1/2 for y in {0,1}
    default:
      return kLogisticQuadratic;
  }
}

namespace {

void CheckSizes(int d, int dk) {
  if (d < 1 || dk < 1 || dk > d) {
    throw InputError("party feature count " + std::to_string(dk) +
                     " must lie in [1, d=" + std::to_string(d) + "]");
  }
}

}  // namespace

double GlobalSensitivity(TaskKind task, int d) {
  if (d < 1) throw InputError("d must be at least 1");
  const double dd = d;
  if (task == TaskKind::kLinear) return 2.0 * (1.0 + 2.0 * dd + dd * dd);
  return dd * dd / 4.0 + dd;
}

double PartySensitivity(TaskKind task, int d, int dk, bool is_label_owner) {
  CheckSizes(d, dk);
  const double dd = d, k = dk;
  if (task == TaskKind::kLinear) {
    return is_label_owner ? 2.0 * (1.0 + 2.0 * dd + k * dd)
                          : 2.0 * (2.0 * k + k * dd);
  }
  return is_label_owner ? dd + k * (2.0 * dd - k) / 4.0
                        : k + k * (2.0 * dd - k) / 4.0;
}

double SubSensitivityG(TaskKind task, int d, int dk, bool is_label_owner) {
  CheckSizes(d, dk);
  const double k = dk;
  const double c0 = WorstCaseMagnitude(task, CoeffIndex::Constant());
  const double c1 = WorstCaseMagnitude(task, CoeffIndex::Linear(0));
  const double c2 = WorstCaseMagnitude(task, CoeffIndex::Quadratic(0, 0));
  // Non-owners hold no label, so only their own quadratic block is
  // single-party.
  const double owner_terms = is_label_owner ? c0 + k * c1 : 0.0;
  return 2.0 * (owner_terms + k * k * c2);
}

double SubSensitivityH(TaskKind task, int d, int dk, int dl,
                       bool involves_label) {
  CheckSizes(d, dk);
  CheckSizes(d, dl);
  if (dk + dl > d) {
    throw InputError("cross-party block sizes exceed d");
  }
  const double c1 = WorstCaseMagnitude(task, CoeffIndex::Linear(0));
  const double c2 = WorstCaseMagnitude(task, CoeffIndex::Quadratic(0, 0));
  const double label_terms = involves_label ? dl * c1 : 0.0;
  return 2.0 * (label_terms + 2.0 * dk * dl * c2);
}

}  // namespace vfm

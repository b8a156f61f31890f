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

#ifndef VFM_OBJECTIVE_H_
#define VFM_OBJECTIVE_H_

#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vfm/dataset.h"

namespace vfm {

// Second-order Taylor constants of log(1 + exp(z)) at z = 0, already divided
// by j!: f(0), f'(0)/1!, f''(0)/2!.
inline constexpr double kLogisticConstant = std::numbers::ln2;
inline constexpr double kLogisticLinear = 0.5;
inline constexpr double kLogisticQuadratic = 0.125;

// Position of one polynomial coefficient. Degree-2 coefficients are ordered
// pairs (a, b); (a, b) and (b, a) are distinct coefficients.
struct CoeffIndex {
  int degree = 0;
  int a = 0;
  int b = 0;

  static CoeffIndex Constant() { return {0, 0, 0}; }
  static CoeffIndex Linear(int a) { return {1, a, 0}; }
  static CoeffIndex Quadratic(int a, int b) { return {2, a, b}; }

  // Canonical order: constant, then linear by feature, then quadratic
  // row-major. Flat(d) is the position in that order.
  std::size_t Flat(int d) const;
  static CoeffIndex FromFlat(std::size_t flat, int d);

  // "l0", "l1[3]", "l2[1,2]"
  std::string Name() const;

  bool operator==(const CoeffIndex&) const = default;
};

inline std::size_t CoefficientCount(int d) {
  return 1 + static_cast<std::size_t>(d) + static_cast<std::size_t>(d) * d;
}

// f(w) = constant + linear . w + w^T quadratic w
struct PolyObjective {
  double constant = 0.0;
  Eigen::VectorXd linear;
  Eigen::MatrixXd quadratic;

  static PolyObjective Zero(int d);

  int dim() const { return static_cast<int>(linear.size()); }
  std::size_t coefficient_count() const { return CoefficientCount(dim()); }

  double& at(CoeffIndex index);
  double at(CoeffIndex index) const;

  // All coefficients in canonical order.
  std::vector<double> Flatten() const;
  static PolyObjective Unflatten(std::span<const double> coeffs, int d);

  double Evaluate(const Eigen::VectorXd& w) const;

  PolyObjective& operator+=(const PolyObjective& other);
};

// Every data-dependent coefficient is scale * <u, v> for two per-record
// vectors u and v, each either a feature column or the label-derived column
// (y for linear, 1/2 - y for logistic).
struct CoefficientRecipe {
  struct Factor {
    bool is_label = false;
    int feature = 0;
  };
  Factor u;
  Factor v;
  double scale = 1.0;
};

// Throws InputError for the logistic constant, which has no recipe.
CoefficientRecipe RecipeFor(TaskKind task, CoeffIndex index);
Eigen::VectorXd LabelColumn(TaskKind task, const Eigen::VectorXd& labels);

PolyObjective LinearRecordCoeffs(const Record& record, int d);
PolyObjective LogisticRecordCoeffs(const Record& record, int d);
PolyObjective RecordCoeffs(const Record& record, TaskKind task, int d);

// Coefficient-wise sum over records. Throws InputError on an empty input or
// mismatched dimensions. This is the record-at-a-time reference path.
PolyObjective Aggregate(std::span<const Record> records, TaskKind task);

// Same sum over a validated dataset through the column kernels. Each
// coefficient is accumulated over records in index order, so the result is
// bit-identical to what any party computes for its share of coefficients.
PolyObjective Aggregate(const Dataset& data);

// Largest |lambda_{phi,t}| any single record t of the input domain can
// produce for this coefficient.
double WorstCaseMagnitude(TaskKind task, CoeffIndex index);

// Whether the coefficient depends on the data at all. The logistic constant
// term is the fixed Taylor constant and carries no privacy cost.
bool IsDataDependent(TaskKind task, CoeffIndex index);

// 2(1 + 2d + d^2) for linear, d^2/4 + d for logistic.
double GlobalSensitivity(TaskKind task, int d);

// Closed-form sensitivity with respect to one party's columns:
//   linear, label owner      2(1 + 2d + d1*d)
//   linear, other party      2(2dk + dk*d)
//   logistic, label owner    d + d1(2d - d1)/4
//   logistic, other party    dk + dk(2d - dk)/4
// Throws InputError unless 1 <= dk <= d.
double PartySensitivity(TaskKind task, int d, int dk, bool is_label_owner);

// Sensitivity of the single-party block g^k and the cross-party block h^kl,
// evaluated as 2 * sum of worst-case magnitudes over the block. For h, `dk`
// is the label owner when `involves_label` is set, and the block covers both
// orderings of each cross pair.
double SubSensitivityG(TaskKind task, int d, int dk, bool is_label_owner);
double SubSensitivityH(TaskKind task, int d, int dk, int dl,
                       bool involves_label);

}  // namespace vfm

#endif  // VFM_OBJECTIVE_H_

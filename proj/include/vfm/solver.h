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

#ifndef VFM_SOLVER_H_
#define VFM_SOLVER_H_

#include <Eigen/Dense>

#include "vfm/dataset.h"
#include "vfm/objective.h"

namespace vfm {

struct Model {
  Eigen::VectorXd weights;
  TaskKind task = TaskKind::kLinear;
};

struct MinimizeReport {
  Eigen::VectorXd weights;
  // Eigenvalues of the symmetrized quadratic raised to the floor.
  int clipped_eigenvalues = 0;
  // Infinity norm of the repaired objective's gradient at `weights`.
  double gradient_norm = 0.0;
};

// Minimizes constant + linear . w + w^T Q w. The quadratic is symmetrized,
// S = (Q + Q^T) / 2, eigenvalues below `ridge_floor` are raised to it, and
// 2 S' w = -linear is solved in the eigenbasis. Throws InputError on
// non-finite coefficients or a negative floor, and SolverError if the
// repaired system is still singular (floor 0 with a zero eigenvalue) or the
// result misses the gradient tolerance 1e-8 * (1 + |linear|_inf).
MinimizeReport MinimizeDetailed(const PolyObjective& objective,
                                double ridge_floor);
Eigen::VectorXd Minimize(const PolyObjective& objective, double ridge_floor);

// Default eigenvalue floor for an objective aggregated over n records.
inline double DefaultRidgeFloor(Eigen::Index n) {
  return 1e-4 * static_cast<double>(n);
}

double Sigmoid(double z);

// x^T w for linear models, sigmoid(x^T w) for logistic ones.
double Predict(const Model& model, const Eigen::VectorXd& x);
double Mse(const Model& model, const Dataset& data);
// Fraction of records with (prediction >= threshold) == (label == 1).
double Accuracy(const Model& model, const Dataset& data,
                double threshold = 0.5);

}  // namespace vfm

#endif  // VFM_SOLVER_H_

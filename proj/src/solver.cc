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

#include "vfm/solver.h"

#include <cmath>
#include <string>

#include "vfm/errors.h"

namespace vfm {

MinimizeReport MinimizeDetailed(const PolyObjective& objective,
                                double ridge_floor) {
  const int d = objective.dim();
  if (objective.quadratic.rows() != d || objective.quadratic.cols() != d) {
    throw InputError("quadratic block is not d x d");
  }
  if (!objective.linear.allFinite() || !objective.quadratic.allFinite() ||
      !std::isfinite(objective.constant)) {
    throw InputError("objective has non-finite coefficients");
  }
  if (!(ridge_floor >= 0.0)) {
    throw InputError("ridge floor must be non-negative");
  }
  const Eigen::MatrixXd sym =
      0.5 * (objective.quadratic + objective.quadratic.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw SolverError("eigendecomposition of the quadratic block failed");
  }
  Eigen::VectorXd values = eig.eigenvalues();
  MinimizeReport report;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < ridge_floor) {
      values[i] = ridge_floor;
      ++report.clipped_eigenvalues;
    }
    if (values[i] <= 0.0) {
      throw SolverError("quadratic block is singular and the ridge floor is 0");
    }
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  const Eigen::VectorXd projected = v.transpose() * objective.linear;
  report.weights = -0.5 * v * (projected.array() / values.array()).matrix();

  const Eigen::MatrixXd repaired = v * values.asDiagonal() * v.transpose();
  const Eigen::VectorXd gradient =
      2.0 * repaired * report.weights + objective.linear;
  report.gradient_norm = gradient.lpNorm<Eigen::Infinity>();
  const double tol =
      1e-8 * (1.0 + objective.linear.lpNorm<Eigen::Infinity>());
  if (!report.weights.allFinite() || report.gradient_norm > tol) {
    throw SolverError("minimizer misses the gradient tolerance: |g|_inf = " +
                      std::to_string(report.gradient_norm));
  }
  return report;
}

Eigen::VectorXd Minimize(const PolyObjective& objective, double ridge_floor) {
  return MinimizeDetailed(objective, ridge_floor).weights;
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

void CheckDim(const Model& model, Eigen::Index d) {
  if (model.weights.size() != d) {
    throw InputError("model has " + std::to_string(model.weights.size()) +
                     " weights but the input has " + std::to_string(d) +
                     " features");
  }
}

}  // namespace

double Predict(const Model& model, const Eigen::VectorXd& x) {
  CheckDim(model, x.size());
  const double z = x.dot(model.weights);
  return model.task == TaskKind::kLinear ? z : Sigmoid(z);
}

double Mse(const Model& model, const Dataset& data) {
  CheckDim(model, data.dim());
  if (data.size() == 0) throw InputError("mse of an empty dataset");
  const Eigen::VectorXd residual =
      data.features() * model.weights - data.labels();
  return residual.squaredNorm() / static_cast<double>(data.size());
}

double Accuracy(const Model& model, const Dataset& data, double threshold) {
  CheckDim(model, data.dim());
  if (data.size() == 0) throw InputError("accuracy of an empty dataset");
  const Eigen::VectorXd z = data.features() * model.weights;
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double p =
        model.task == TaskKind::kLinear ? z[i] : Sigmoid(z[i]);
    correct += ((p >= threshold) == (data.labels()[i] == 1.0)) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace vfm

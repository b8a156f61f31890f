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

#include "vfm/baselines.h"

#include <algorithm>
#include <cmath>

#include "vfm/errors.h"
#include "vfm/rng.h"

namespace vfm {
namespace {

constexpr double kGradientTolerance = 1e-6;
constexpr int kNewtonIterations = 200;

Eigen::VectorXd LeastSquares(const Dataset& data,
                             std::vector<std::string>* warnings) {
  const Eigen::MatrixXd& x = data.features();
  const Eigen::MatrixXd gram = x.transpose() * x;
  const Eigen::VectorXd rhs = x.transpose() * data.labels();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const Eigen::VectorXd pivots = ldlt.vectorD();
  // rcond alone misses exact zero pivots.
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
      ldlt.rcond() > 1e-12 &&
      pivots.minCoeff() > 1e-12 * pivots.cwiseAbs().maxCoeff()) {
    return ldlt.solve(rhs);
  }
  const double ridge =
      1e-8 * std::max(1.0, gram.trace() / static_cast<double>(gram.rows()));
  if (warnings != nullptr) {
    warnings->push_back("normal equations are singular; added ridge " +
                        std::to_string(ridge));
  }
  const Eigen::MatrixXd damped =
      gram + ridge * Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
  return damped.ldlt().solve(rhs);
}

double MeanLogLoss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& w) {
  const Eigen::VectorXd z = x * w;
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // log(1 + e^z) - y z, stable for large |z|
    const double softplus =
        z[i] > 0 ? z[i] + std::log1p(std::exp(-z[i])) : std::log1p(std::exp(z[i]));
    total += softplus - y[i] * z[i];
  }
  return total / static_cast<double>(z.size());
}

Eigen::VectorXd LogisticNewton(const Dataset& data,
                               std::vector<std::string>* warnings) {
  const Eigen::MatrixXd& x = data.features();
  const Eigen::VectorXd& y = data.labels();
  const double n = static_cast<double>(data.size());
  const Eigen::Index d = data.dim();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double loss = MeanLogLoss(x, y, w);
  for (int it = 0; it < kNewtonIterations; ++it) {
    const Eigen::VectorXd z = x * w;
    Eigen::VectorXd p(z.size());
    Eigen::VectorXd curvature(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      p[i] = Sigmoid(z[i]);
      curvature[i] = p[i] * (1.0 - p[i]);
    }
    const Eigen::VectorXd grad = x.transpose() * (p - y) / n;
    if (grad.lpNorm<Eigen::Infinity>() <= kGradientTolerance) return w;
    Eigen::MatrixXd hess =
        x.transpose() * curvature.asDiagonal() * x / n;
    hess.diagonal().array() += 1e-10;
    Eigen::VectorXd step = hess.ldlt().solve(-grad);
    if (!step.allFinite()) step = -grad;
    // Backtrack until the loss decreases.
    double t = 1.0;
    Eigen::VectorXd next = w + step;
    double next_loss = MeanLogLoss(x, y, next);
    while (next_loss > loss && t > 1e-10) {
      t *= 0.5;
      next = w + t * step;
      next_loss = MeanLogLoss(x, y, next);
    }
    if (next_loss > loss) break;
    w = std::move(next);
    loss = next_loss;
  }
  if (warnings != nullptr) {
    warnings->push_back("logistic fit stopped before reaching gradient "
                        "tolerance (data may be separable)");
  }
  return w;
}

}  // namespace

Model FitNonPrivate(const Dataset& data, std::vector<std::string>* warnings) {
  if (data.size() == 0) throw InputError("cannot fit an empty dataset");
  Model model;
  model.task = data.task();
  model.weights = data.task() == TaskKind::kLinear
                      ? LeastSquares(data, warnings)
                      : LogisticNewton(data, warnings);
  return model;
}

DpsgdResult Dpsgd(const Dataset& data, const SgdConfig& config,
                  std::uint64_t seed, bool keep_draw_log) {
  if (config.iterations < 1) throw InputError("DPSGD needs T >= 1");
  if (!(config.clip > 0.0)) throw InputError("DPSGD needs C > 0");
  if (data.size() == 0) throw InputError("cannot fit an empty dataset");
  const Eigen::MatrixXd& x = data.features();
  const Eigen::VectorXd& y = data.labels();
  const Eigen::Index n = data.size();
  const Eigen::Index d = data.dim();
  const bool linear = data.task() == TaskKind::kLinear;

  DpsgdResult result;
  result.learning_rate = config.learning_rate > 0.0
                             ? config.learning_rate
                             : 0.1 / static_cast<double>(n);
  result.noise_scale =
      config.epsilon.noise_off()
          ? 0.0
          : 2.0 * config.clip * config.iterations / config.epsilon.value();
  result.model.task = data.task();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  const Eigen::VectorXd row_l1 = x.cwiseAbs().rowwise().sum();
  NoiseStream stream(seed, SeedDomain::kDpsgd, 0);

  Eigen::VectorXd coef(n);
  for (int t = 0; t < config.iterations; ++t) {
    const Eigen::VectorXd z = x * w;
    // Per-example gradient is coef_i * x_i before clipping.
    for (Eigen::Index i = 0; i < n; ++i) {
      const double g = linear ? 2.0 * (z[i] - y[i]) : Sigmoid(z[i]) - y[i];
      const double norm = std::abs(g) * row_l1[i];
      coef[i] = norm > config.clip ? g * (config.clip / norm) : g;
    }
    Eigen::VectorXd grad = x.transpose() * coef;
    if (result.noise_scale > 0.0) {
      for (Eigen::Index a = 0; a < d; ++a) {
        const double noise = LaplaceSample(result.noise_scale, stream);
        if (keep_draw_log) result.draw_log.push_back(noise);
        grad[a] += noise;
      }
    }
    w -= result.learning_rate * grad;
  }
  result.draws = stream.draws();
  result.model.weights = std::move(w);
  return result;
}

}  // namespace vfm

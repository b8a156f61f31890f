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

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "vfm/data.h"
#include "vfm/errors.h"
#include "vfm/solver.h"

namespace vfm {
namespace {

TEST(FitNonPrivateTest, RecoversNoiselessLinearWeights) {
  DatasetSpec spec;
  spec.n = 400;
  spec.d = 6;
  spec.label_noise = 0.0;
  const SyntheticData s = GenSynthetic(spec, TaskKind::kLinear);
  std::vector<std::string> warnings;
  const Model m = FitNonPrivate(s.data, &warnings);
  const Eigen::VectorXd expected = s.true_weights / s.true_weights.lpNorm<1>();
  EXPECT_LE((m.weights - expected).lpNorm<Eigen::Infinity>(), 1e-6);
  EXPECT_TRUE(warnings.empty());
}

TEST(FitNonPrivateTest, SingularSystemGetsRidgeAndWarning) {
  Eigen::MatrixXd x(1, 2);
  x << 1.0, 1.0;
  const Dataset data(TaskKind::kLinear, x, Eigen::VectorXd::Ones(1));
  std::vector<std::string> warnings;
  const Model m = FitNonPrivate(data, &warnings);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("ridge"), std::string::npos);
  EXPECT_NEAR(m.weights.sum(), 1.0, 1e-6);
  EXPECT_NEAR(m.weights[0], m.weights[1], 1e-9);
}

TEST(FitNonPrivateTest, SeparableLogisticIsClassifiedPerfectly) {
  Eigen::MatrixXd x(6, 1);
  x << -1.0, -0.5, -0.2, 0.2, 0.5, 1.0;
  Eigen::VectorXd y(6);
  y << 0, 0, 0, 1, 1, 1;
  const Dataset data(TaskKind::kLogistic, x, y);
  const Model m = FitNonPrivate(data);
  EXPECT_EQ(Accuracy(m, data), 1.0);
}

TEST(FitNonPrivateTest, LogisticGradientVanishesOnOverlappingData) {
  DatasetSpec spec;
  spec.n = 500;
  spec.d = 3;
  spec.logit_scale = 1.0;
  const Dataset data = GenSynthetic(spec, TaskKind::kLogistic).data;
  std::vector<std::string> warnings;
  const Model m = FitNonPrivate(data, &warnings);
  EXPECT_TRUE(warnings.empty());
  // Oracle: gradient of the mean log-loss computed directly.
  Eigen::VectorXd g = Eigen::VectorXd::Zero(3);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd xi = data.features().row(i).transpose();
    g += (1.0 / (1.0 + std::exp(-xi.dot(m.weights))) - data.labels()[i]) * xi;
  }
  EXPECT_LE((g / 500.0).lpNorm<Eigen::Infinity>(), 1e-6);
}

// Independent full-batch loop with explicit per-example L1 clipping.
Eigen::VectorXd OracleClippedGd(const Dataset& data, int iters, double lr,
                                double clip) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(data.dim());
  for (int t = 0; t < iters; ++t) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(data.dim());
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      const Eigen::VectorXd xi = data.features().row(i).transpose();
      const double z = xi.dot(w);
      const double r = data.task() == TaskKind::kLinear
                           ? 2.0 * (z - data.labels()[i])
                           : 1.0 / (1.0 + std::exp(-z)) - data.labels()[i];
      Eigen::VectorXd gi = r * xi;
      const double norm = gi.lpNorm<1>();
      if (norm > clip) gi *= clip / norm;
      grad += gi;
    }
    w -= lr * grad;
  }
  return w;
}

TEST(DpsgdTest, NoiseOffMatchesOracle) {
  DatasetSpec spec;
  spec.n = 60;
  spec.d = 3;
  for (TaskKind task : {TaskKind::kLinear, TaskKind::kLogistic}) {
    const Dataset data = GenSynthetic(spec, task).data;
    for (double clip : {100.0, 0.05}) {
      SgdConfig cfg;
      cfg.iterations = 25;
      cfg.learning_rate = 0.01;
      cfg.clip = clip;
      cfg.epsilon = Epsilon::NoiseOff();
      const DpsgdResult r = Dpsgd(data, cfg, 1);
      EXPECT_EQ(r.noise_scale, 0.0);
      EXPECT_EQ(r.draws, 0u);
      EXPECT_LE((r.model.weights - OracleClippedGd(data, 25, 0.01, clip))
                    .lpNorm<Eigen::Infinity>(),
                1e-12);
    }
  }
}

TEST(DpsgdTest, NoiseScaleAndDrawCount) {
  DatasetSpec spec;
  spec.n = 50;
  spec.d = 4;
  const Dataset data = GenSynthetic(spec, TaskKind::kLinear).data;
  SgdConfig cfg;
  cfg.iterations = 10;
  cfg.clip = 0.5;
  cfg.epsilon = Epsilon(2.0);
  const DpsgdResult r = Dpsgd(data, cfg, 3, true);
  EXPECT_DOUBLE_EQ(r.noise_scale, 2.0 * 0.5 * 10 / 2.0);
  EXPECT_DOUBLE_EQ(r.learning_rate, 0.1 / 50);
  EXPECT_EQ(r.draws, 40u);
  EXPECT_EQ(r.draw_log.size(), 40u);
  const DpsgdResult again = Dpsgd(data, cfg, 3);
  EXPECT_EQ(again.model.weights, r.model.weights);
}

TEST(DpsgdTest, InvalidConfig) {
  const Dataset data(TaskKind::kLinear, Eigen::MatrixXd::Zero(3, 1),
                     Eigen::VectorXd::Zero(3));
  SgdConfig cfg;
  cfg.iterations = 0;
  EXPECT_THROW(Dpsgd(data, cfg, 1), InputError);
  cfg.iterations = 1;
  cfg.clip = 0.0;
  EXPECT_THROW(Dpsgd(data, cfg, 1), InputError);
}

}  // namespace
}  // namespace vfm

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

#ifndef VFM_BASELINES_H_
#define VFM_BASELINES_H_

#include <cstdint>
#include <string>
#include <vector>

#include "vfm/dataset.h"
#include "vfm/dp.h"
#include "vfm/solver.h"

namespace vfm {

// Linear: least squares via the normal equations, with a small ridge added
// (and a warning recorded) when X^T X is singular or nearly so. Logistic:
// damped Newton on the exact mean log-loss until the gradient's infinity
// norm is <= 1e-6 or 200 iterations elapse.
Model FitNonPrivate(const Dataset& data,
                    std::vector<std::string>* warnings = nullptr);

struct SgdConfig {
  int iterations = 100;
  // <= 0 selects the default 0.1 / n.
  double learning_rate = 0.0;
  double clip = 1.0;
  Epsilon epsilon = Epsilon(1.0);
};

struct DpsgdResult {
  Model model;
  double learning_rate = 0.0;
  // Per-coordinate Laplace scale added at every iteration (0 with noise
  // off): 2 C T / epsilon.
  double noise_scale = 0.0;
  std::uint64_t draws = 0;
  // Every noise value in draw order, when requested.
  std::vector<double> draw_log;
};

// Full-batch gradient descent from w = 0. Each per-example gradient is
// scaled to L1 norm at most C, the clipped gradients are summed, Laplace
// noise of scale 2 C T / epsilon is added per coordinate and the step is
// taken with the learning rate. Each iteration spends epsilon / T. Throws
// InputError on an invalid configuration.
DpsgdResult Dpsgd(const Dataset& data, const SgdConfig& config,
                  std::uint64_t seed, bool keep_draw_log = false);

}  // namespace vfm

#endif  // VFM_BASELINES_H_

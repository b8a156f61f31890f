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

#ifndef VFM_DP_H_
#define VFM_DP_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vfm/partition.h"
#include "vfm/rng.h"

namespace vfm {

// A privacy level, or the explicit "noise off" setting (spelled "inf").
class Epsilon {
 public:
  static Epsilon NoiseOff() { return Epsilon(); }
  // Throws InputError unless value is finite and > 0.
  explicit Epsilon(double value);
  // Accepts a positive number or "inf".
  static Epsilon Parse(std::string_view text);

  bool noise_off() const { return noise_off_; }
  // +infinity when noise is off.
  double value() const;
  std::string ToString() const;

  bool operator==(const Epsilon&) const = default;

 private:
  Epsilon() : value_(0.0), noise_off_(true) {}

  double value_;
  bool noise_off_;
};

// Inverse CDF of Laplace(0, scale) at u in (0, 1).
double LaplaceFromUniform(double u, double scale);

// One draw from Laplace(0, scale). Throws InputError if scale <= 0.
double LaplaceSample(double scale, NoiseStream& stream);

// Adds an independent Laplace(delta_f / epsilon) draw to each coefficient in
// slice order, consuming one draw per coefficient. Leaves the slice alone
// and draws nothing when noise is off.
void Perturb(std::span<double> coeffs, double delta_f, Epsilon epsilon,
             NoiseStream& stream);

// epsilon * delta_f_k / delta_f. Throws InvariantError if
// delta_f_k > delta_f and InputError on non-positive sensitivities.
double PartyEpsilon(double epsilon, double delta_f, double delta_f_k);

struct SubBudget {
  double sensitivity = 0.0;
  double epsilon = 0.0;
};

// sum_k (delta_f / dg_k) eps_k + sum_{k,l} (delta_f / dh_kl) eps_kl, where
// `terms` holds every (sub-sensitivity, sub-budget) pair. Throws InputError
// when a sub-budget is attached to a zero sub-sensitivity or any value is
// negative.
double BottomUpEpsilon(double delta_f, std::span<const SubBudget> terms);

// How noise draws are tied to coefficients.
//   kCoefficientKeyed: coefficient c always receives the first draw of the
//     substream (seed, c), whoever adds it.
//   kPerParty: party k draws sequentially from substream (seed, k) over its
//     noise-adder coefficients in canonical order.
enum class NoiseMode { kCoefficientKeyed, kPerParty };

std::string_view NoiseModeName(NoiseMode mode);
NoiseMode ParseNoiseMode(std::string_view name);

struct NoiseRequest {
  std::size_t flat = 0;  // canonical coefficient position
  double scale = 0.0;    // Laplace scale; 0 means no noise
};

// Noise values for one party's requests, which must be in canonical order.
// Returns one value per request (0 for scale 0) and the number of draws.
std::vector<double> DrawNoise(std::span<const NoiseRequest> requests,
                              PartyId party, NoiseMode mode,
                              std::uint64_t seed, std::uint64_t* draws = nullptr);

enum class BudgetMode { kTopDown, kBottomUp };

using PartyPair = std::pair<PartyId, PartyId>;  // first < second

struct PartyPrivacy {
  PartyId party = kLabelOwner;
  double delta_f_k = 0.0;  // closed-form sensitivity w.r.t. this party
  double epsilon_k = 0.0;  // privacy level achieved w.r.t. this party
};

// Resolved privacy accounting for one run.
class PrivacyBudget {
 public:
  // Server fixes epsilon; each party gets (delta_f_k / delta_f) * epsilon.
  static PrivacyBudget TopDown(TaskKind task, const VerticalPartition& partition,
                               Epsilon epsilon);

  // Parties fix eps^k for their single-party block and eps^kl for each pair
  // block; the global level follows from BottomUpEpsilon. Every party and
  // every pair needs a positive budget.
  static PrivacyBudget BottomUp(TaskKind task,
                                const VerticalPartition& partition,
                                std::map<PartyId, double> single_budgets,
                                std::map<PartyPair, double> pair_budgets);

  BudgetMode mode() const { return mode_; }
  Epsilon epsilon() const { return epsilon_; }
  double delta_f() const { return delta_f_; }
  const std::vector<PartyPrivacy>& per_party() const { return per_party_; }
  const std::map<PartyId, double>& single_budgets() const {
    return single_budgets_;
  }
  const std::map<PartyPair, double>& pair_budgets() const {
    return pair_budgets_;
  }

  // Laplace scale for one allocated coefficient; 0 when it is not perturbed
  // or noise is off.
  double NoiseScale(const AllocationEntry& entry) const;

 private:
  PrivacyBudget() = default;

  BudgetMode mode_ = BudgetMode::kTopDown;
  TaskKind task_ = TaskKind::kLinear;
  Epsilon epsilon_ = Epsilon::NoiseOff();
  double delta_f_ = 0.0;
  std::vector<PartyPrivacy> per_party_;
  std::map<PartyId, double> single_budgets_;
  std::map<PartyPair, double> pair_budgets_;
  // Bottom-up only: sensitivities of each block.
  std::map<PartyId, double> single_sensitivity_;
  std::map<PartyPair, double> pair_sensitivity_;
};

}  // namespace vfm

#endif  // VFM_DP_H_

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

#include "vfm/dp.h"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "vfm/errors.h"

namespace vfm {

Epsilon::Epsilon(double value) : value_(value), noise_off_(false) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw InputError("epsilon must be a positive finite number or 'inf', got " +
                     std::to_string(value));
  }
}

Epsilon Epsilon::Parse(std::string_view text) {
  if (text == "inf" || text == "Inf" || text == "INF") return NoiseOff();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError("cannot parse epsilon '" + std::string(text) + "'");
  }
  return Epsilon(v);
}

double Epsilon::value() const {
  return noise_off_ ? std::numeric_limits<double>::infinity() : value_;
}

std::string Epsilon::ToString() const {
  if (noise_off_) return "inf";
  std::ostringstream os;
  os << value_;
  return os.str();
}

double LaplaceFromUniform(double u, double scale) {
  const double centered = u - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(centered));
  return centered < 0.0 ? -magnitude : magnitude;
}

double LaplaceSample(double scale, NoiseStream& stream) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InputError("Laplace scale must be positive, got " +
                     std::to_string(scale));
  }
  return LaplaceFromUniform(stream.NextUniform(), scale);
}

void Perturb(std::span<double> coeffs, double delta_f, Epsilon epsilon,
             NoiseStream& stream) {
  if (epsilon.noise_off()) return;
  const double scale = delta_f / epsilon.value();
  for (double& c : coeffs) c += LaplaceSample(scale, stream);
}

double PartyEpsilon(double epsilon, double delta_f, double delta_f_k) {
  if (!(delta_f > 0.0) || !(delta_f_k > 0.0)) {
    throw InputError("sensitivities must be positive");
  }
  if (delta_f_k > delta_f) {
    throw InvariantError("party sensitivity " + std::to_string(delta_f_k) +
                         " exceeds global sensitivity " +
                         std::to_string(delta_f));
  }
  return delta_f_k / delta_f * epsilon;
}

double BottomUpEpsilon(double delta_f, std::span<const SubBudget> terms) {
  if (!(delta_f > 0.0)) throw InputError("global sensitivity must be positive");
  double total = 0.0;
  for (const SubBudget& t : terms) {
    if (t.epsilon < 0.0 || t.sensitivity < 0.0) {
      throw InputError("sub-budgets and sub-sensitivities must be non-negative");
    }
    if (t.sensitivity == 0.0) {
      if (t.epsilon != 0.0) {
        throw InputError("sub-budget attached to a zero sub-sensitivity");
      }
      continue;
    }
    total += delta_f / t.sensitivity * t.epsilon;
  }
  return total;
}

std::string_view NoiseModeName(NoiseMode mode) {
  return mode == NoiseMode::kCoefficientKeyed ? "coefficient" : "party";
}

NoiseMode ParseNoiseMode(std::string_view name) {
  if (name == "coefficient") return NoiseMode::kCoefficientKeyed;
  if (name == "party") return NoiseMode::kPerParty;
  throw InputError("unknown noise mode '" + std::string(name) +
                   "' (expected coefficient or party)");
}

std::vector<double> DrawNoise(std::span<const NoiseRequest> requests,
                              PartyId party, NoiseMode mode,
                              std::uint64_t seed, std::uint64_t* draws) {
  std::vector<double> out(requests.size(), 0.0);
  std::uint64_t used = 0;
  NoiseStream party_stream(seed, SeedDomain::kPartyNoise,
                           static_cast<std::uint64_t>(party));
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (i > 0 && requests[i].flat <= requests[i - 1].flat) {
      throw InvariantError("noise requests must be in canonical order");
    }
    if (requests[i].scale == 0.0) continue;
    if (mode == NoiseMode::kCoefficientKeyed) {
      NoiseStream s(seed, SeedDomain::kCoefficientNoise, requests[i].flat);
      out[i] = LaplaceSample(requests[i].scale, s);
      used += s.draws();
    } else {
      out[i] = LaplaceSample(requests[i].scale, party_stream);
    }
  }
  if (mode == NoiseMode::kPerParty) used = party_stream.draws();
  if (draws != nullptr) *draws = used;
  return out;
}

PrivacyBudget PrivacyBudget::TopDown(TaskKind task,
                                     const VerticalPartition& partition,
                                     Epsilon epsilon) {
  PrivacyBudget b;
  b.mode_ = BudgetMode::kTopDown;
  b.task_ = task;
  b.epsilon_ = epsilon;
  const int d = partition.dim();
  b.delta_f_ = GlobalSensitivity(task, d);
  for (PartyId k = 1; k <= partition.num_parties(); ++k) {
    const double dfk = PartySensitivity(task, d, partition.size(k),
                                        k == partition.label_owner());
    b.per_party_.push_back(
        {k, dfk, PartyEpsilon(epsilon.value(), b.delta_f_, dfk)});
  }
  return b;
}

PrivacyBudget PrivacyBudget::BottomUp(TaskKind task,
                                      const VerticalPartition& partition,
                                      std::map<PartyId, double> single_budgets,
                                      std::map<PartyPair, double> pair_budgets) {
  PrivacyBudget b;
  b.mode_ = BudgetMode::kBottomUp;
  b.task_ = task;
  const int d = partition.dim();
  const int num_parties = partition.num_parties();
  b.delta_f_ = GlobalSensitivity(task, d);

  std::vector<SubBudget> terms;
  for (PartyId k = 1; k <= num_parties; ++k) {
    const auto it = single_budgets.find(k);
    if (it == single_budgets.end() || !(it->second > 0.0)) {
      throw InputError("bottom-up mode needs a positive budget for party " +
                       std::to_string(k));
    }
    const double dg = SubSensitivityG(task, d, partition.size(k),
                                      k == partition.label_owner());
    b.single_sensitivity_[k] = dg;
    terms.push_back({dg, it->second});
  }
  for (PartyId k = 1; k <= num_parties; ++k) {
    for (PartyId l = k + 1; l <= num_parties; ++l) {
      const auto it = pair_budgets.find({k, l});
      if (it == pair_budgets.end() || !(it->second > 0.0)) {
        throw InputError("bottom-up mode needs a positive budget for pair " +
                         std::to_string(k) + "-" + std::to_string(l));
      }
      const double dh =
          SubSensitivityH(task, d, partition.size(k), partition.size(l),
                          k == partition.label_owner());
      b.pair_sensitivity_[{k, l}] = dh;
      terms.push_back({dh, it->second});
    }
  }
  for (const auto& [pair, eps] : pair_budgets) {
    if (pair.first >= pair.second || pair.first < 1 ||
        pair.second > num_parties) {
      throw InputError("invalid party pair " + std::to_string(pair.first) +
                       "-" + std::to_string(pair.second));
    }
  }
  b.epsilon_ = Epsilon(BottomUpEpsilon(b.delta_f_, terms));
  for (PartyId k = 1; k <= num_parties; ++k) {
    double total = single_budgets.at(k);
    for (const auto& [pair, eps] : pair_budgets) {
      if (pair.first == k || pair.second == k) total += eps;
    }
    b.per_party_.push_back(
        {k,
         PartySensitivity(task, d, partition.size(k),
                          k == partition.label_owner()),
         total});
  }
  b.single_budgets_ = std::move(single_budgets);
  b.pair_budgets_ = std::move(pair_budgets);
  return b;
}

double PrivacyBudget::NoiseScale(const AllocationEntry& entry) const {
  if (!entry.perturbed) return 0.0;
  if (mode_ == BudgetMode::kTopDown) {
    return epsilon_.noise_off() ? 0.0 : delta_f_ / epsilon_.value();
  }
  if (entry.kind == CoeffKind::kSingleParty) {
    return single_sensitivity_.at(entry.first) /
           single_budgets_.at(entry.first);
  }
  const PartyPair pair{entry.first, entry.second};
  return pair_sensitivity_.at(pair) / pair_budgets_.at(pair);
}

}  // namespace vfm

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

#include "vfm/sensitivity_audit.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vfm/errors.h"
#include "vfm/objective.h"
#include "vfm/rng.h"

namespace vfm {

std::size_t SensitivityAuditReport::Violations() const {
  std::size_t total = 0;
  for (const auto& c : checks) total += c.violations;
  return total;
}

double CoefficientDistance(const std::vector<double>& a,
                           const std::vector<double>& b) {
  if (a.size() != b.size()) throw InputError("coefficient vectors differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

std::vector<double> UncheckedCoefficients(const std::vector<Record>& records,
                                          TaskKind task, int d) {
  std::vector<double> out(CoefficientCount(d), 0.0);
  for (const Record& r : records) {
    const double label =
        task == TaskKind::kLinear ? r.label : kLogisticLinear - r.label;
    auto factor = [&](const CoefficientRecipe::Factor& f) {
      return f.is_label ? label : r.features[static_cast<std::size_t>(f.feature)];
    };
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
      const CoeffIndex idx = CoeffIndex::FromFlat(flat, d);
      if (!IsDataDependent(task, idx)) {
        out[flat] += kLogisticConstant;
        continue;
      }
      const CoefficientRecipe recipe = RecipeFor(task, idx);
      out[flat] += recipe.scale * (factor(recipe.u) * factor(recipe.v));
    }
  }
  return out;
}

namespace {

Record RandomRecord(TaskKind task, int d, NoiseStream& stream) {
  Record r;
  r.features.resize(static_cast<std::size_t>(d));
  for (double& x : r.features) x = stream.NextUniform(-1.0, 1.0);
  r.label = task == TaskKind::kLinear
                ? stream.NextUniform(-1.0, 1.0)
                : static_cast<double>(stream.NextBelow(2));
  return r;
}

bool InDomain(const std::vector<Record>& records, TaskKind task) {
  for (const Record& r : records) {
    try {
      ValidateRecord(r, task);
    } catch (const InputError&) {
      return false;
    }
  }
  return true;
}

}  // namespace

SensitivityAuditReport RunSensitivityAudit(
    const SensitivityAuditConfig& config) {
  if (config.pairs < 1 || config.records < 1) {
    throw InputError("audit needs at least one pair and one record");
  }
  const int d = config.d;
  const VerticalPartition partition =
      VerticalPartition::Even(d, config.num_parties);
  const CoefficientAllocation allocation = Dissect(config.task, partition);

  SensitivityAuditReport report;
  report.pairs = config.pairs;
  report.checks.push_back(
      {"global", GlobalSensitivity(config.task, d), 0.0, 0});
  std::vector<std::vector<bool>> masks;
  for (PartyId k = 1; k <= partition.num_parties(); ++k) {
    const bool owner = k == partition.label_owner();
    report.checks.push_back(
        {"P" + std::to_string(k) + " closed-form",
         PartySensitivity(config.task, d, partition.size(k), owner), 0.0, 0});
    report.checks.push_back({"P" + std::to_string(k) + " definitional",
                             DefinitionalPartySensitivity(allocation, k), 0.0,
                             0});
    std::vector<bool> mask(allocation.size());
    for (std::size_t f = 0; f < allocation.size(); ++f) {
      mask[f] = allocation.at(f).Involves(k);
    }
    masks.push_back(std::move(mask));
  }

  constexpr std::size_t kMaxOffending = 20;
  for (int p = 0; p < config.pairs; ++p) {
    NoiseStream stream(config.seed, SeedDomain::kAudit,
                       static_cast<std::uint64_t>(p));
    std::vector<Record> first;
    for (int i = 0; i < config.records; ++i) {
      first.push_back(RandomRecord(config.task, d, stream));
    }
    std::vector<Record> second = first;
    const auto changed = stream.NextBelow(static_cast<std::uint64_t>(config.records));
    second[changed] = RandomRecord(config.task, d, stream);
    if (config.inject_out_of_range && p == 0) second[changed].features[0] = 2.0;

    const std::vector<double> a = UncheckedCoefficients(first, config.task, d);
    const std::vector<double> b = UncheckedCoefficients(second, config.task, d);
    const double full = CoefficientDistance(a, b);

    if (!InDomain(first, config.task) || !InDomain(second, config.task)) {
      ++report.ingestion_faults;
      if (report.offending.size() < kMaxOffending) {
        std::ostringstream s;
        s << "pair " << p << ": record " << changed
          << " lies outside the input domain (distance " << full
          << "); rejected at ingestion, not a sensitivity-bound violation";
        report.offending.push_back(s.str());
      }
      continue;
    }

    auto check = [&](SensitivityCheck& c, double dist) {
      c.max_distance = std::max(c.max_distance, dist);
      if (dist <= c.bound * (1.0 + 1e-12)) return;
      ++c.violations;
      if (report.offending.size() < kMaxOffending) {
        std::ostringstream s;
        s << "pair " << p << " (record " << changed << "): " << c.scope
          << " distance " << dist << " > " << c.bound;
        report.offending.push_back(s.str());
      }
    };
    check(report.checks[0], full);
    for (std::size_t k = 0; k < masks.size(); ++k) {
      double dist = 0.0;
      for (std::size_t f = 0; f < a.size(); ++f) {
        if (masks[k][f]) dist += std::abs(a[f] - b[f]);
      }
      check(report.checks[1 + 2 * k], dist);
      check(report.checks[2 + 2 * k], dist);
    }
  }
  return report;
}

}  // namespace vfm

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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "vfm/objective.h"
#include "vfm/partition.h"

namespace vfm {
namespace {

const SensitivityCheck* Find(const SensitivityAuditReport& r,
                             const std::string& scope) {
  for (const auto& c : r.checks) {
    if (c.scope == scope) return &c;
  }
  return nullptr;
}

TEST(CoefficientDistanceTest, L1) {
  EXPECT_EQ(CoefficientDistance({1.0, -2.0}, {0.0, 1.0}), 4.0);
}

TEST(UncheckedCoefficientsTest, AgreesWithAggregateInsideDomain) {
  const std::vector<Record> recs = {{{0.5, -1.0}, 0.25}, {{1.0, 0.0}, -1.0}};
  EXPECT_EQ(UncheckedCoefficients(recs, TaskKind::kLinear, 2),
            Aggregate(recs, TaskKind::kLinear).Flatten());
  // Out of domain: computed anyway.
  const std::vector<Record> bad = {{{2.0}, 1.0}};
  EXPECT_EQ(UncheckedCoefficients(bad, TaskKind::kLinear, 1)[2], 4.0);
}

TEST(SensitivityAuditTest, RandomPairsRespectEveryBound) {
  for (TaskKind task : {TaskKind::kLinear, TaskKind::kLogistic}) {
    SensitivityAuditConfig cfg;
    cfg.task = task;
    cfg.d = 5;
    cfg.num_parties = 3;
    cfg.pairs = 300;
    const SensitivityAuditReport r = RunSensitivityAudit(cfg);
    EXPECT_TRUE(r.Passed());
    EXPECT_EQ(r.pairs, 300);
    const SensitivityCheck* global = Find(r, "global");
    ASSERT_NE(global, nullptr);
    EXPECT_EQ(global->bound, GlobalSensitivity(task, 5));
    EXPECT_GT(global->max_distance, 0.0);
    EXPECT_NE(Find(r, "P3 definitional"), nullptr);
  }
}

TEST(SensitivityAuditTest, InjectedOutOfRangeRecordIsCaught) {
  SensitivityAuditConfig cfg;
  cfg.pairs = 20;
  cfg.inject_out_of_range = true;
  const SensitivityAuditReport r = RunSensitivityAudit(cfg);
  EXPECT_EQ(r.ingestion_faults, 1u);
  EXPECT_FALSE(r.Passed());
  EXPECT_FALSE(r.offending.empty());
}

// Enumerates every pair of single-record datasets with entries in
// {-1, 0, 1} and returns the largest coefficient distance restricted to the
// coefficients that party `k` touches.
double VertexMaxForParty(TaskKind task, const VerticalPartition& p,
                         PartyId k) {
  const int d = p.dim();
  const CoefficientAllocation alloc = Dissect(task, p);
  std::vector<Record> verts;
  const int total = static_cast<int>(std::pow(3, d + 1));
  for (int code = 0; code < total; ++code) {
    Record r;
    int c = code;
    for (int a = 0; a < d; ++a, c /= 3) r.features.push_back(c % 3 - 1.0);
    r.label = c % 3 - 1.0;
    if (task == TaskKind::kLogistic && r.label < 0) continue;
    verts.push_back(r);
  }
  std::vector<std::vector<double>> coeffs;
  for (const Record& r : verts) coeffs.push_back(UncheckedCoefficients({r}, task, d));
  double best = 0.0;
  for (const auto& cx : coeffs) {
    for (const auto& cy : coeffs) {
      double dist = 0.0;
      for (std::size_t f = 0; f < cx.size(); ++f) {
        if (alloc.at(f).Involves(k)) dist += std::abs(cx[f] - cy[f]);
      }
      best = std::max(best, dist);
    }
  }
  return best;
}

TEST(VertexSearchTest, NonOwnerClosedFormCanBeExceeded) {
  // One feature held by the non-owner out of three. The closed form counts
  // each cross quadratic once; the coefficient vector stores both orders.
  const VerticalPartition p(3, {{0, 1}, {2}});
  const double vertex = VertexMaxForParty(TaskKind::kLinear, p, 2);
  EXPECT_GT(vertex, PartySensitivity(TaskKind::kLinear, 3, 1, false));
  EXPECT_LE(vertex, DefinitionalPartySensitivity(
                        Dissect(TaskKind::kLinear, p), 2));
}

TEST(VertexSearchTest, OwnerAndLogisticClosedFormsHold) {
  const VerticalPartition p(4, {{0, 1}, {2, 3}});
  EXPECT_LE(VertexMaxForParty(TaskKind::kLinear, p, 1),
            PartySensitivity(TaskKind::kLinear, 4, 2, true));
  for (PartyId k : {1, 2}) {
    EXPECT_LE(VertexMaxForParty(TaskKind::kLogistic, p, k),
              PartySensitivity(TaskKind::kLogistic, 4, 2, k == 1));
  }
}

}  // namespace
}  // namespace vfm

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

#include "vfm/protocol.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "vfm/data.h"
#include "vfm/dp.h"
#include "vfm/errors.h"
#include "vfm/objective.h"
#include "vfm/partition.h"

namespace vfm {
namespace {

Dataset Synthetic(TaskKind task, Eigen::Index n, int d, std::uint64_t seed) {
  DatasetSpec spec;
  spec.n = n;
  spec.d = d;
  spec.seed = seed;
  return GenSynthetic(spec, task).data;
}

double MaxAbsDiff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).lpNorm<Eigen::Infinity>();
}

ProtocolResult RunEven(const Dataset& data, int k, Epsilon eps,
                       ProtocolOptions opts = {}) {
  const auto p = VerticalPartition::Even(static_cast<int>(data.dim()), k);
  return RunProtocol(data, p,
                     PrivacyBudget::TopDown(data.task(), p, eps), opts);
}

TEST(ProtocolTest, SinglePartyMatchesCentralizedWithoutDotProducts) {
  const Dataset data = Synthetic(TaskKind::kLinear, 200, 4, 1);
  const ProtocolResult r = RunEven(data, 1, Epsilon(1.0));
  const auto p = VerticalPartition::Even(4, 1);
  const CentralizedResult c = CentralizedFunctionalMechanism(
      data, p, PrivacyBudget::TopDown(TaskKind::kLinear, p, Epsilon(1.0)), 1,
      NoiseMode::kCoefficientKeyed);
  EXPECT_EQ(r.model.weights, c.model.weights);
  EXPECT_EQ(r.secure_dots, 0u);
  EXPECT_EQ(r.transcript.Count(MessageTag::kCrossInit), 0u);
}

TEST(ProtocolTest, PlaintextBackendMatchesCentralizedExactly) {
  for (TaskKind task : {TaskKind::kLinear, TaskKind::kLogistic}) {
    const Dataset data = Synthetic(task, 300, 6, 2);
    for (int k : {2, 3, 6}) {
      for (NoiseMode mode : {NoiseMode::kCoefficientKeyed,
                             NoiseMode::kPerParty}) {
        ProtocolOptions opts;
        opts.backend = SecureBackend::kPlaintextDebug;
        opts.noise_mode = mode;
        const ProtocolResult r = RunEven(data, k, Epsilon(1.0), opts);
        const auto p = VerticalPartition::Even(6, k);
        const CentralizedResult c = CentralizedFunctionalMechanism(
            data, p, PrivacyBudget::TopDown(task, p, Epsilon(1.0)), 1, mode);
        EXPECT_EQ(r.noisy_objective.Flatten(), c.noisy_objective.Flatten());
        EXPECT_LE(MaxAbsDiff(r.model.weights, c.model.weights), 1e-9);
      }
    }
  }
}

TEST(ProtocolTest, SecretSharingMatchesPlaintextClosely) {
  const Dataset data = Synthetic(TaskKind::kLinear, 400, 5, 3);
  ProtocolOptions plain;
  plain.backend = SecureBackend::kPlaintextDebug;
  const ProtocolResult a = RunEven(data, 3, Epsilon(1.0), plain);
  const ProtocolResult b = RunEven(data, 3, Epsilon(1.0));
  const auto fa = a.noisy_objective.Flatten();
  const auto fb = b.noisy_objective.Flatten();
  for (std::size_t i = 0; i < fa.size(); ++i) {
    // 400 products, each off by at most about 2^-31 after rounding.
    EXPECT_NEAR(fa[i], fb[i], 400 * std::ldexp(1.0, -30));
  }
  EXPECT_LE(MaxAbsDiff(a.model.weights, b.model.weights), 1e-5);
}

TEST(ProtocolTest, NoiseOffRecoversLeastSquares) {
  DatasetSpec spec;
  spec.n = 500;
  spec.d = 4;
  spec.label_noise = 0.0;
  const SyntheticData s = GenSynthetic(spec, TaskKind::kLinear);
  ProtocolOptions opts;
  opts.ridge_floor = 0.0;
  const ProtocolResult r = RunEven(s.data, 2, Epsilon::NoiseOff(), opts);
  const Eigen::VectorXd expected = s.true_weights / s.true_weights.lpNorm<1>();
  EXPECT_LE(MaxAbsDiff(r.model.weights, expected), 1e-8);
}

TEST(ProtocolTest, DeterministicAcrossRuns) {
  const Dataset data = Synthetic(TaskKind::kLogistic, 150, 5, 4);
  const ProtocolResult a = RunEven(data, 2, Epsilon(0.5));
  const ProtocolResult b = RunEven(data, 2, Epsilon(0.5));
  EXPECT_EQ(a.model.weights, b.model.weights);
  EXPECT_EQ(a.transcript.ExportLines(), b.transcript.ExportLines());
}

TEST(ProtocolTest, ThreadedSchedulerGivesSameCanonicalTranscript) {
  const Dataset data = Synthetic(TaskKind::kLinear, 150, 6, 5);
  ProtocolOptions threaded;
  threaded.scheduler = SchedulerKind::kThreaded;
  for (int trial = 0; trial < 5; ++trial) {
    const ProtocolResult a = RunEven(data, 3, Epsilon(1.0));
    const ProtocolResult b = RunEven(data, 3, Epsilon(1.0), threaded);
    EXPECT_EQ(a.model.weights, b.model.weights);
    EXPECT_EQ(a.transcript.Canonicalize().ExportLines(),
              b.transcript.Canonicalize().ExportLines());
  }
}

TEST(ProtocolTest, CoefficientKeyedNoiseIsInvariantToK) {
  const Dataset data = Synthetic(TaskKind::kLinear, 200, 4, 6);
  ProtocolOptions opts;
  opts.backend = SecureBackend::kPlaintextDebug;
  const auto base = RunEven(data, 1, Epsilon(1.0), opts).model.weights;
  for (int k : {2, 4}) {
    EXPECT_LE(MaxAbsDiff(RunEven(data, k, Epsilon(1.0), opts).model.weights, base),
              1e-9);
  }
}

TEST(ProtocolTest, OneNoiseAdditionPerCoefficientAndBoundedDots) {
  for (TaskKind task : {TaskKind::kLinear, TaskKind::kLogistic}) {
    const Dataset data = Synthetic(task, 100, 5, 7);
    for (int k : {1, 2, 5}) {
      const ProtocolResult r = RunEven(data, k, Epsilon(1.0));
      const auto counts = CountNoiseAdditions(r.transcript,
                                              CoefficientCount(5));
      EXPECT_EQ(counts, r.noise_additions);
      for (std::size_t f = 0; f < counts.size(); ++f) {
        EXPECT_EQ(counts[f], r.allocation.at(f).perturbed ? 1 : 0);
      }
      EXPECT_LE(r.secure_dots, 5u * 5u + 5u);
      EXPECT_EQ(r.secure_dots, r.allocation.CountKind(CoeffKind::kCrossParty));
      EXPECT_TRUE(r.triples.Balanced());
      EXPECT_EQ(r.transcript.Count(MessageTag::kModel),
                static_cast<std::size_t>(k));
    }
  }
}

TEST(ProtocolTest, ServerViewIsCleanUnderSecretSharing) {
  const Dataset data = Synthetic(TaskKind::kLinear, 120, 4, 8);
  ProtocolOptions opts;
  opts.retain_payloads = true;
  const ProtocolResult r = RunEven(data, 2, Epsilon(1.0), opts);
  const AuditReport audit =
      AuditServerView(r.transcript, data, r.allocation);
  EXPECT_TRUE(audit.Clean());
  EXPECT_TRUE(audit.debug_findings.empty());
  std::size_t to_server = 0;
  for (const auto& e : r.transcript.entries()) {
    if (e.message.receiver == kServer) ++to_server;
  }
  EXPECT_EQ(audit.messages_checked, to_server);
}

TEST(ProtocolTest, SkippedNoiseIsFlagged) {
  const Dataset data = Synthetic(TaskKind::kLinear, 120, 4, 8);
  ProtocolOptions opts;
  opts.retain_payloads = true;
  opts.skip_noise_on = CoeffIndex::Quadratic(0, 3).Flat(4);
  const ProtocolResult r = RunEven(data, 2, Epsilon(1.0), opts);
  const AuditReport audit =
      AuditServerView(r.transcript, data, r.allocation);
  ASSERT_FALSE(audit.Clean());
  EXPECT_EQ(audit.findings[0].coeff, *opts.skip_noise_on);
  EXPECT_EQ(r.noise_additions[*opts.skip_noise_on], 0);
}

TEST(ProtocolTest, PlaintextDebugLeaksOnlyInsideDebugMessages) {
  const Dataset data = Synthetic(TaskKind::kLinear, 120, 4, 9);
  ProtocolOptions opts;
  opts.retain_payloads = true;
  opts.backend = SecureBackend::kPlaintextDebug;
  const ProtocolResult r = RunEven(data, 2, Epsilon(1.0), opts);
  const AuditReport audit =
      AuditServerView(r.transcript, data, r.allocation);
  EXPECT_TRUE(audit.Clean());
  EXPECT_FALSE(audit.debug_findings.empty());
}

TEST(ProtocolTest, AuditNeedsPayloads) {
  const Dataset data = Synthetic(TaskKind::kLinear, 50, 2, 10);
  const ProtocolResult r = RunEven(data, 2, Epsilon(1.0));
  EXPECT_THROW(AuditServerView(r.transcript, data, r.allocation), InputError);
}

TEST(ProtocolTest, OverflowSurfacesAsOverflowError) {
  const Dataset data = Synthetic(TaskKind::kLinear, 20, 2, 11);
  ProtocolOptions opts;
  opts.fractional_bits = 62;
  EXPECT_THROW(RunEven(data, 2, Epsilon(1.0), opts), OverflowError);
}

TEST(ProtocolTest, MismatchedPartitionIsInputError) {
  const Dataset data = Synthetic(TaskKind::kLinear, 20, 3, 12);
  const auto p = VerticalPartition::Even(4, 2);
  EXPECT_THROW(RunProtocol(data, p,
                           PrivacyBudget::TopDown(TaskKind::kLinear, p,
                                                  Epsilon(1.0)),
                           {}),
               InputError);
}

TEST(TranscriptTest, PayloadsDroppedUnlessRetained) {
  ProtocolTranscript t(false);
  Message m;
  m.reals = {1.0, 2.0};
  t.Append(m);
  EXPECT_TRUE(t.entries()[0].message.reals.empty());
  EXPECT_EQ(t.entries()[0].digest, m.Digest());
  Message other = m;
  other.reals = {1.0, 2.5};
  EXPECT_NE(other.Digest(), m.Digest());
}

TEST(SchedulerTest, NamesRoundTrip) {
  for (SchedulerKind s : {SchedulerKind::kDeterministic,
                          SchedulerKind::kThreaded}) {
    EXPECT_EQ(ParseScheduler(SchedulerName(s)), s);
  }
  EXPECT_THROW(ParseScheduler("x"), InputError);
}

}  // namespace
}  // namespace vfm

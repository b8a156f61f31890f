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

#ifndef VFM_PROTOCOL_H_
#define VFM_PROTOCOL_H_

// In-process simulation of the distributed functional-mechanism protocol.
// A coordinating server and K parties exchange messages through a scheduler;
// the server dissects the objective, parties compute and perturb their
// coefficients (cross-party ones through a secure dot product with the
// server as the second share holder) and the server solves the assembled
// noisy objective once.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vfm/dataset.h"
#include "vfm/dp.h"
#include "vfm/field.h"
#include "vfm/partition.h"
#include "vfm/secure.h"
#include "vfm/solver.h"

namespace vfm {

// 0 is the server, 1..K the parties.
using ActorId = int;
inline constexpr ActorId kServer = 0;
std::string ActorName(ActorId id);

enum class MessageTag {
  kAllocate,       // server -> party: noise duties and scales
  kCrossInit,      // server -> both parties of a cross coefficient
  kShareLead,      // lead -> server: server's share of the lead's vector
  kSharePartner,   // partner -> lead and partner -> server: vector shares
  kOpeningLead,    // lead -> server: masked differences e0, f0
  kOpeningServer,  // server -> lead: masked differences e1, f1
  kResultShare,    // server -> lead: server's share of the product
  kDebugPlain,     // party -> server: raw vector (plaintext-debug only)
  kDebugResult,    // server -> lead: plain product (plaintext-debug only)
  kPeerResult,     // lead -> partner: the unperturbed product
  kSingleCoeff,    // party -> server: perturbed single-party coefficient
  kCrossCoeff,     // lead -> server: perturbed cross-party coefficient
  kModel,          // server -> party: solved weights
};
std::string_view TagName(MessageTag tag);

inline constexpr std::size_t kNoCoefficient = static_cast<std::size_t>(-1);

struct Message {
  std::uint64_t seq = 0;
  ActorId sender = kServer;
  ActorId receiver = kServer;
  MessageTag tag = MessageTag::kAllocate;
  std::size_t coeff = kNoCoefficient;  // canonical flat index
  // Set on messages that exist only because of the plaintext-debug backend.
  bool debug_audit = false;
  // Coefficient submissions: whether the noise step was applied.
  bool noised = false;
  std::vector<double> reals;
  std::vector<FieldElement> elements;
  std::vector<std::uint64_t> indices;

  // Word-wise FNV-1a 64 over tag, endpoints, coefficient and payload.
  std::uint64_t Digest() const;
};

struct TranscriptEntry {
  Message message;  // payload cleared unless retained
  std::uint64_t digest = 0;
};

class ProtocolTranscript {
 public:
  explicit ProtocolTranscript(bool retain_payloads = true)
      : retain_payloads_(retain_payloads) {}

  bool retain_payloads() const { return retain_payloads_; }
  void Append(const Message& message);
  const std::vector<TranscriptEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // Orders entries by (coefficient, step, sender, receiver, digest) and
  // renumbers them, so runs under different interleavings compare equal.
  ProtocolTranscript Canonicalize() const;

  // One line per message: seq, sender, receiver, tag, coefficient, digest
  // (hex), tab-separated.
  std::string ExportLines() const;

  std::size_t Count(MessageTag tag) const;

 private:
  bool retain_payloads_;
  std::vector<TranscriptEntry> entries_;
};

enum class SchedulerKind { kDeterministic, kThreaded };
std::string_view SchedulerName(SchedulerKind kind);
SchedulerKind ParseScheduler(std::string_view name);

struct ProtocolOptions {
  std::uint64_t seed = 1;
  SecureBackend backend = SecureBackend::kSecretSharing;
  NoiseMode noise_mode = NoiseMode::kCoefficientKeyed;
  // Negative selects DefaultRidgeFloor(n).
  double ridge_floor = -1.0;
  SchedulerKind scheduler = SchedulerKind::kDeterministic;
  int fractional_bits = FixedPointCodec::kDefaultFractionalBits;
  bool retain_payloads = false;
  // Fault injection: the noise adder of this coefficient skips the noise.
  std::optional<std::size_t> skip_noise_on;
};

struct ProtocolResult {
  Model model;
  MinimizeReport solve;
  PolyObjective noisy_objective;
  CoefficientAllocation allocation;
  ProtocolTranscript transcript;
  // Per canonical coefficient: how many times the noise step ran on it.
  std::vector<int> noise_additions;
  std::size_t secure_dots = 0;
  TripleLedger triples;
  std::vector<std::string> warnings;
};

// Runs the protocol end to end. Throws ProtocolError on step-order or
// duplicate-message violations and on a stalled run, SolverError if the
// server's solve fails, and InputError on inconsistent inputs.
ProtocolResult RunProtocol(const Dataset& data,
                           const VerticalPartition& partition,
                           const PrivacyBudget& budget,
                           const ProtocolOptions& options);

struct CentralizedResult {
  Model model;
  MinimizeReport solve;
  PolyObjective exact_objective;
  PolyObjective noisy_objective;
};

// Reference pipeline with every column in one place: aggregate, perturb
// each coefficient with the noise its allocated adder would draw, solve.
CentralizedResult CentralizedFunctionalMechanism(
    const Dataset& data, const VerticalPartition& partition,
    const PrivacyBudget& budget, std::uint64_t seed, NoiseMode noise_mode,
    double ridge_floor = -1.0);

// Noise additions per coefficient read off the transcript's coefficient
// submissions.
std::vector<int> CountNoiseAdditions(const ProtocolTranscript& transcript,
                                     std::size_t coefficient_count);

// Largest magnitude an honest submission can plausibly have: the
// per-record bound times n plus 50 noise scales.
double SubmissionAllowance(TaskKind task, CoeffIndex index, Eigen::Index n,
                           double noise_scale);

struct AuditFinding {
  std::uint64_t seq = 0;
  MessageTag tag = MessageTag::kAllocate;
  std::size_t coeff = kNoCoefficient;
  std::string reason;
};

struct AuditReport {
  std::vector<AuditFinding> findings;        // outside debug messages
  std::vector<AuditFinding> debug_findings;  // inside debug-tagged messages
  std::size_t messages_checked = 0;
  bool Clean() const { return findings.empty(); }
};

// Inspects every payload the server received and flags raw feature or label
// values (as reals or as fixed-point field encodings) and coefficient
// submissions equal to the exact, unperturbed coefficient. Requires a
// transcript with retained payloads.
AuditReport AuditServerView(const ProtocolTranscript& transcript,
                            const Dataset& data,
                            const CoefficientAllocation& allocation,
                            int fractional_bits =
                                FixedPointCodec::kDefaultFractionalBits);

}  // namespace vfm

#endif  // VFM_PROTOCOL_H_

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

#ifndef VFM_PARTITION_H_
#define VFM_PARTITION_H_

#include <cstddef>
#include <functional>
#include <vector>

#include "vfm/objective.h"

namespace vfm {

// Parties are numbered 1..K; party 1 always owns the label.
using PartyId = int;
inline constexpr PartyId kLabelOwner = 1;

class VerticalPartition {
 public:
  // `party_features[k-1]` lists the 0-based feature indices of party k.
  // Throws InputError unless the sets are non-empty, disjoint and cover
  // [0, d).
  VerticalPartition(int d, std::vector<std::vector<int>> party_features);

  // Contiguous blocks whose sizes differ by at most one, larger blocks
  // first. Throws InputError unless 1 <= K <= d.
  static VerticalPartition Even(int d, int num_parties);

  int dim() const { return d_; }
  int num_parties() const { return static_cast<int>(features_.size()); }
  PartyId label_owner() const { return kLabelOwner; }

  const std::vector<int>& features(PartyId k) const;
  int size(PartyId k) const { return static_cast<int>(features(k).size()); }
  PartyId owner(int feature) const;

 private:
  int d_;
  std::vector<std::vector<int>> features_;
  std::vector<PartyId> owner_;
};

enum class CoeffKind { kSingleParty, kCrossParty };

struct AllocationEntry {
  CoeffIndex index;
  CoeffKind kind = CoeffKind::kSingleParty;
  // Single-party: first == second == the computing party. Cross-party:
  // the two distinct parties, first < second.
  PartyId first = kLabelOwner;
  PartyId second = kLabelOwner;
  // Party that perturbs the value and submits it to the server.
  PartyId noise_adder = kLabelOwner;
  // Data-independent coefficients (the logistic constant) are submitted
  // without noise.
  bool perturbed = true;

  bool Involves(PartyId k) const { return first == k || second == k; }
  PartyId Partner() const { return noise_adder == first ? second : first; }
};

class CoefficientAllocation {
 public:
  CoefficientAllocation(TaskKind task, int d,
                        std::vector<AllocationEntry> entries);

  TaskKind task() const { return task_; }
  int dim() const { return d_; }
  std::size_t size() const { return entries_.size(); }

  // Entries are stored in canonical coefficient order.
  const std::vector<AllocationEntry>& entries() const { return entries_; }
  const AllocationEntry& at(std::size_t flat) const { return entries_[flat]; }
  const AllocationEntry& at(CoeffIndex index) const {
    return entries_[index.Flat(d_)];
  }

  std::size_t CountKind(CoeffKind kind) const;
  std::size_t PerturbedCount() const;

 private:
  TaskKind task_;
  int d_;
  std::vector<AllocationEntry> entries_;
};

// Splits the objective into single-party and cross-party coefficients:
//   constant               single, label owner
//   linear a               single if party 1 owns a, else cross (1, owner(a))
//                          with the feature owner adding noise
//   quadratic (a, b)       single if one party owns both, else cross between
//                          the two owners with the lower id adding noise
CoefficientAllocation Dissect(TaskKind task, const VerticalPartition& partition);

// 2 * sum of worst-case per-record magnitudes over the selected entries.
// This evaluates the sensitivity definition directly for any coefficient
// subset.
double DefinitionalSensitivity(
    const CoefficientAllocation& allocation,
    const std::function<bool(const AllocationEntry&)>& select);

// Definitional sensitivity over every coefficient that involves party k.
double DefinitionalPartySensitivity(const CoefficientAllocation& allocation,
                                    PartyId k);

}  // namespace vfm

#endif  // VFM_PARTITION_H_

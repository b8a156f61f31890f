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

#include "vfm/partition.h"

#include <algorithm>
#include <string>

#include "vfm/errors.h"

namespace vfm {

VerticalPartition::VerticalPartition(
    int d, std::vector<std::vector<int>> party_features)
    : d_(d), features_(std::move(party_features)) {
  if (d < 1) throw InputError("partition needs d >= 1");
  if (features_.empty()) throw InputError("partition needs at least one party");
  owner_.assign(static_cast<std::size_t>(d), 0);
  for (std::size_t k = 0; k < features_.size(); ++k) {
    auto& set = features_[k];
    if (set.empty()) {
      throw InputError("party " + std::to_string(k + 1) + " owns no features");
    }
    std::sort(set.begin(), set.end());
    for (int a : set) {
      if (a < 0 || a >= d) {
        throw InputError("feature index " + std::to_string(a) +
                         " out of range for d=" + std::to_string(d));
      }
      if (owner_[static_cast<std::size_t>(a)] != 0) {
        throw InputError("feature " + std::to_string(a) +
                         " assigned to parties " +
                         std::to_string(owner_[static_cast<std::size_t>(a)]) +
                         " and " + std::to_string(k + 1));
      }
      owner_[static_cast<std::size_t>(a)] = static_cast<PartyId>(k + 1);
    }
  }
  for (int a = 0; a < d; ++a) {
    if (owner_[static_cast<std::size_t>(a)] == 0) {
      throw InputError("feature " + std::to_string(a) + " has no owner");
    }
  }
}

VerticalPartition VerticalPartition::Even(int d, int num_parties) {
  if (num_parties < 1 || num_parties > d) {
    throw InputError("cannot split d=" + std::to_string(d) + " features over " +
                     std::to_string(num_parties) + " parties");
  }
  std::vector<std::vector<int>> sets(static_cast<std::size_t>(num_parties));
  const int base = d / num_parties, extra = d % num_parties;
  int next = 0;
  for (int k = 0; k < num_parties; ++k) {
    const int size = base + (k < extra ? 1 : 0);
    for (int i = 0; i < size; ++i) sets[static_cast<std::size_t>(k)].push_back(next++);
  }
  return VerticalPartition(d, std::move(sets));
}

const std::vector<int>& VerticalPartition::features(PartyId k) const {
  if (k < 1 || k > num_parties()) {
    throw InputError("no party " + std::to_string(k));
  }
  return features_[static_cast<std::size_t>(k - 1)];
}

PartyId VerticalPartition::owner(int feature) const {
  if (feature < 0 || feature >= d_) {
    throw InputError("feature index " + std::to_string(feature) +
                     " out of range");
  }
  return owner_[static_cast<std::size_t>(feature)];
}

CoefficientAllocation::CoefficientAllocation(
    TaskKind task, int d, std::vector<AllocationEntry> entries)
    : task_(task), d_(d), entries_(std::move(entries)) {
  if (entries_.size() != CoefficientCount(d)) {
    throw InvariantError("allocation must cover all " +
                         std::to_string(CoefficientCount(d)) +
                         " coefficients exactly once");
  }
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const AllocationEntry& e = entries_[k];
    if (e.index.Flat(d) != k) {
      throw InvariantError("allocation entry " + e.index.Name() +
                           " is out of canonical order");
    }
    const bool cross = e.kind == CoeffKind::kCrossParty;
    if (cross != (e.first != e.second) || (cross && e.first > e.second) ||
        !e.Involves(e.noise_adder)) {
      throw InvariantError("malformed allocation entry " + e.index.Name());
    }
  }
}

std::size_t CoefficientAllocation::CountKind(CoeffKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(),
                    [kind](const AllocationEntry& e) { return e.kind == kind; }));
}

std::size_t CoefficientAllocation::PerturbedCount() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(),
                    [](const AllocationEntry& e) { return e.perturbed; }));
}

namespace {

AllocationEntry Single(CoeffIndex index, PartyId k) {
  return {index, CoeffKind::kSingleParty, k, k, k, true};
}

AllocationEntry Cross(CoeffIndex index, PartyId k, PartyId l, PartyId adder) {
  return {index, CoeffKind::kCrossParty, std::min(k, l), std::max(k, l), adder,
          true};
}

}  // namespace

CoefficientAllocation Dissect(TaskKind task,
                              const VerticalPartition& partition) {
  const int d = partition.dim();
  const PartyId label_owner = partition.label_owner();
  std::vector<AllocationEntry> entries;
  entries.reserve(CoefficientCount(d));

  AllocationEntry constant = Single(CoeffIndex::Constant(), label_owner);
  constant.perturbed = IsDataDependent(task, constant.index);
  entries.push_back(constant);

  for (int a = 0; a < d; ++a) {
    const PartyId owner = partition.owner(a);
    entries.push_back(owner == label_owner
                          ? Single(CoeffIndex::Linear(a), owner)
                          : Cross(CoeffIndex::Linear(a), label_owner, owner,
                                  owner));
  }
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      const PartyId k = partition.owner(a), l = partition.owner(b);
      const CoeffIndex index = CoeffIndex::Quadratic(a, b);
      entries.push_back(k == l ? Single(index, k)
                               : Cross(index, k, l, std::min(k, l)));
    }
  }
  return CoefficientAllocation(task, d, std::move(entries));
}

double DefinitionalSensitivity(
    const CoefficientAllocation& allocation,
    const std::function<bool(const AllocationEntry&)>& select) {
  double sum = 0.0;
  for (const AllocationEntry& e : allocation.entries()) {
    if (select(e)) sum += WorstCaseMagnitude(allocation.task(), e.index);
  }
  return 2.0 * sum;
}

double DefinitionalPartySensitivity(const CoefficientAllocation& allocation,
                                    PartyId k) {
  return DefinitionalSensitivity(
      allocation, [k](const AllocationEntry& e) { return e.Involves(k); });
}

}  // namespace vfm

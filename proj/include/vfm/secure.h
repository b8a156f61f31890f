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

#ifndef VFM_SECURE_H_
#define VFM_SECURE_H_

// Two-holder additive secret sharing over GF(2^127 - 1) with dealer-issued
// Beaver triples. Holder 0 is a party; holder 1 is the server. Semi-honest
// model: every actor follows the protocol and only inspects what it
// receives.

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "vfm/field.h"
#include "vfm/kernels.h"
#include "vfm/rng.h"

namespace vfm {

// Random field element uniform on [0, p).
FieldElement RandomFieldElement(NoiseStream& stream);

struct ShareVector {
  std::vector<FieldElement> values;
  std::size_t size() const { return values.size(); }
};

// s0 is uniformly random and s0 + s1 = v element-wise.
std::pair<ShareVector, ShareVector> Share(std::span<const FieldElement> v,
                                          NoiseStream& stream);
// Throws InputError on a length mismatch.
std::vector<FieldElement> Reconstruct(const ShareVector& s0,
                                      const ShareVector& s1);

// One holder's share of a batch of triples (a_i, b_i, c_i = a_i b_i). A
// batch may be consumed once.
class TripleShare {
 public:
  TripleShare(std::uint64_t batch_id, int holder, kernels::TripleColumns cols)
      : batch_id_(batch_id), holder_(holder), cols_(std::move(cols)) {}

  std::uint64_t batch_id() const { return batch_id_; }
  int holder() const { return holder_; }
  std::size_t size() const { return cols_.size(); }
  bool consumed() const { return consumed_; }

  // Returns the columns and marks the batch used. Throws ProtocolError on a
  // second call.
  const kernels::TripleColumns& Consume();
  // Read access without consuming, for tests.
  const kernels::TripleColumns& columns() const { return cols_; }

 private:
  std::uint64_t batch_id_;
  int holder_;
  kernels::TripleColumns cols_;
  bool consumed_ = false;
};

// Issued vs consumed triple counts across a run.
struct TripleLedger {
  std::uint64_t issued = 0;
  std::uint64_t consumed = 0;
  std::uint64_t dot_products = 0;
  bool Balanced() const { return issued == consumed; }
};

// Trusted setup that produces correlated randomness for the two holders.
class Dealer {
 public:
  explicit Dealer(std::uint64_t seed) : stream_(seed, SeedDomain::kDealer, 0) {}

  std::pair<TripleShare, TripleShare> Issue(std::size_t n);

  std::uint64_t issued() const { return issued_; }

 private:
  NoiseStream stream_;
  std::uint64_t next_batch_ = 0;
  std::uint64_t issued_ = 0;
};

// What one holder publishes when opening x - a and y - b.
struct BeaverOpening {
  std::vector<FieldElement> e;
  std::vector<FieldElement> f;
};

BeaverOpening BeaverOpen(std::span<const FieldElement> x_share,
                         std::span<const FieldElement> y_share,
                         const kernels::TripleColumns& triples);

// Sum of both holders' openings.
BeaverOpening CombineOpenings(const BeaverOpening& mine,
                              const BeaverOpening& theirs);

// Holder's share of sum_i x_i y_i once e and f are public.
FieldElement BeaverDotShare(const BeaverOpening& opened,
                            const kernels::TripleColumns& triples, int holder);

// Element-wise product on shares: returns shares of x_i * y_i. Both triple
// shares are consumed.
std::pair<ShareVector, ShareVector> BeaverMul(
    const std::pair<ShareVector, ShareVector>& x,
    const std::pair<ShareVector, ShareVector>& y, TripleShare& triple0,
    TripleShare& triple1);

enum class SecureBackend { kSecretSharing, kPlaintextDebug };

std::string_view BackendName(SecureBackend backend);
SecureBackend ParseBackend(std::string_view name);

struct SecureDotResult {
  double value = 0.0;
  // Every field element the server (holder 1) received, in arrival order.
  std::vector<FieldElement> server_view;
  std::uint64_t triples_consumed = 0;
};

// Dot product of two real vectors with entries in [-1, 1] held by different
// owners. Under kSecretSharing both vectors are fixed-point encoded, shared
// between a party and the server, and multiplied with Beaver triples; the
// server sees only shares and masked openings. kPlaintextDebug computes the
// value directly. Throws InputError on length mismatch or out-of-range
// entries and OverflowError when n exceeds the codec's safe length.
SecureDotResult SecureDot(std::span<const double> u, std::span<const double> v,
                          SecureBackend backend, std::uint64_t seed,
                          const FixedPointCodec& codec = FixedPointCodec());

// Integer variant on already-encoded values; returns the field result.
FieldElement SecureDotRaw(std::span<const FieldElement> u,
                          std::span<const FieldElement> v, std::uint64_t seed,
                          TripleLedger* ledger = nullptr);

}  // namespace vfm

#endif  // VFM_SECURE_H_

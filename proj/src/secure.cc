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

#include "vfm/secure.h"

#include <string>

#include "vfm/errors.h"

namespace vfm {

FieldElement RandomFieldElement(NoiseStream& stream) {
  for (;;) {
    const uint128 hi = stream.NextBits() >> 1;  // 63 bits
    const uint128 lo = stream.NextBits();
    const uint128 v = (hi << 64) | lo;
    if (v < FieldElement::kModulus) return FieldElement::FromCanonical(v);
  }
}

std::pair<ShareVector, ShareVector> Share(std::span<const FieldElement> v,
                                          NoiseStream& stream) {
  ShareVector s0, s1;
  s0.values.resize(v.size());
  s1.values.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    s0.values[i] = RandomFieldElement(stream);
    s1.values[i] = v[i] - s0.values[i];
  }
  return {std::move(s0), std::move(s1)};
}

std::vector<FieldElement> Reconstruct(const ShareVector& s0,
                                      const ShareVector& s1) {
  if (s0.size() != s1.size()) {
    throw InputError("share lengths differ: " + std::to_string(s0.size()) +
                     " vs " + std::to_string(s1.size()));
  }
  std::vector<FieldElement> out(s0.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = s0.values[i] + s1.values[i];
  }
  return out;
}

const kernels::TripleColumns& TripleShare::Consume() {
  if (consumed_) {
    throw ProtocolError("Beaver triple batch " + std::to_string(batch_id_) +
                        " reused by holder " + std::to_string(holder_));
  }
  consumed_ = true;
  return cols_;
}

std::pair<TripleShare, TripleShare> Dealer::Issue(std::size_t n) {
  kernels::TripleColumns t0, t1;
  for (auto* cols : {&t0, &t1}) {
    cols->a.resize(n);
    cols->b.resize(n);
    cols->c.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const FieldElement a = RandomFieldElement(stream_);
    const FieldElement b = RandomFieldElement(stream_);
    t0.a[i] = RandomFieldElement(stream_);
    t0.b[i] = RandomFieldElement(stream_);
    t0.c[i] = RandomFieldElement(stream_);
    t1.a[i] = a - t0.a[i];
    t1.b[i] = b - t0.b[i];
    t1.c[i] = a * b - t0.c[i];
  }
  const std::uint64_t id = next_batch_++;
  issued_ += n;
  return {TripleShare(id, 0, std::move(t0)), TripleShare(id, 1, std::move(t1))};
}

BeaverOpening BeaverOpen(std::span<const FieldElement> x_share,
                         std::span<const FieldElement> y_share,
                         const kernels::TripleColumns& triples) {
  if (x_share.size() != y_share.size() || x_share.size() != triples.size()) {
    throw InputError("Beaver opening: share and triple lengths differ");
  }
  BeaverOpening out;
  out.e.resize(x_share.size());
  out.f.resize(y_share.size());
  kernels::MaskedDifference(x_share, triples.a, out.e);
  kernels::MaskedDifference(y_share, triples.b, out.f);
  return out;
}

BeaverOpening CombineOpenings(const BeaverOpening& mine,
                              const BeaverOpening& theirs) {
  if (mine.e.size() != theirs.e.size() || mine.f.size() != theirs.f.size()) {
    throw ProtocolError("Beaver openings have different lengths");
  }
  BeaverOpening out = mine;
  for (std::size_t i = 0; i < out.e.size(); ++i) {
    out.e[i] += theirs.e[i];
    out.f[i] += theirs.f[i];
  }
  return out;
}

FieldElement BeaverDotShare(const BeaverOpening& opened,
                            const kernels::TripleColumns& triples, int holder) {
  if (opened.e.size() != triples.size()) {
    throw ProtocolError("Beaver opening does not match the triple batch");
  }
  return kernels::BeaverDotShareParallel(opened.e, opened.f, triples,
                                         holder == 0);
}

std::pair<ShareVector, ShareVector> BeaverMul(
    const std::pair<ShareVector, ShareVector>& x,
    const std::pair<ShareVector, ShareVector>& y, TripleShare& triple0,
    TripleShare& triple1) {
  if (triple0.batch_id() != triple1.batch_id()) {
    throw ProtocolError("Beaver triple shares come from different batches");
  }
  const kernels::TripleColumns& t0 = triple0.Consume();
  const kernels::TripleColumns& t1 = triple1.Consume();
  const BeaverOpening open0 = BeaverOpen(x.first.values, y.first.values, t0);
  const BeaverOpening open1 = BeaverOpen(x.second.values, y.second.values, t1);
  const BeaverOpening opened = CombineOpenings(open0, open1);
  const std::size_t n = opened.e.size();
  ShareVector z0, z1;
  z0.values.resize(n);
  z1.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const FieldElement e = opened.e[i], f = opened.f[i];
    z0.values[i] = t0.c[i] + e * t0.b[i] + f * t0.a[i] + e * f;
    z1.values[i] = t1.c[i] + e * t1.b[i] + f * t1.a[i];
  }
  return {std::move(z0), std::move(z1)};
}

std::string_view BackendName(SecureBackend backend) {
  return backend == SecureBackend::kSecretSharing ? "secret-sharing"
                                                  : "plaintext-debug";
}

SecureBackend ParseBackend(std::string_view name) {
  if (name == "secret-sharing" || name == "ss") {
    return SecureBackend::kSecretSharing;
  }
  if (name == "plaintext-debug" || name == "plaintext") {
    return SecureBackend::kPlaintextDebug;
  }
  throw InputError("unknown backend '" + std::string(name) +
                   "' (expected secret-sharing or plaintext-debug)");
}

namespace {

struct TwoHolderDot {
  FieldElement result;
  std::vector<FieldElement> server_view;
};

// Holder 0 owns u's and v's first shares, holder 1 (the server) the second.
TwoHolderDot RunTwoHolderDot(std::span<const FieldElement> u,
                             std::span<const FieldElement> v,
                             std::uint64_t seed, TripleLedger* ledger) {
  if (u.size() != v.size()) {
    throw InputError("secure dot: vector lengths differ (" +
                     std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()) + ")");
  }
  NoiseStream share_stream(seed, SeedDomain::kShares, 0);
  Dealer dealer(seed);
  auto [u0, u1] = Share(u, share_stream);
  auto [v0, v1] = Share(v, share_stream);
  auto [t0, t1] = dealer.Issue(u.size());

  TwoHolderDot out;
  out.server_view.reserve(4 * u.size() + 1);
  out.server_view.insert(out.server_view.end(), u1.values.begin(),
                         u1.values.end());
  out.server_view.insert(out.server_view.end(), v1.values.begin(),
                         v1.values.end());

  const kernels::TripleColumns& c0 = t0.Consume();
  const kernels::TripleColumns& c1 = t1.Consume();
  const BeaverOpening open0 = BeaverOpen(u0.values, v0.values, c0);
  const BeaverOpening open1 = BeaverOpen(u1.values, v1.values, c1);
  out.server_view.insert(out.server_view.end(), open0.e.begin(), open0.e.end());
  out.server_view.insert(out.server_view.end(), open0.f.begin(), open0.f.end());
  const BeaverOpening opened = CombineOpenings(open0, open1);
  const FieldElement z0 = BeaverDotShare(opened, c0, 0);
  const FieldElement z1 = BeaverDotShare(opened, c1, 1);
  out.result = z0 + z1;
  if (ledger != nullptr) {
    ledger->issued += dealer.issued();
    ledger->consumed += u.size();
    ++ledger->dot_products;
  }
  return out;
}

}  // namespace

FieldElement SecureDotRaw(std::span<const FieldElement> u,
                          std::span<const FieldElement> v, std::uint64_t seed,
                          TripleLedger* ledger) {
  return RunTwoHolderDot(u, v, seed, ledger).result;
}

SecureDotResult SecureDot(std::span<const double> u, std::span<const double> v,
                          SecureBackend backend, std::uint64_t seed,
                          const FixedPointCodec& codec) {
  if (u.size() != v.size()) {
    throw InputError("secure dot: vector lengths differ (" +
                     std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()) + ")");
  }
  SecureDotResult out;
  if (backend == SecureBackend::kPlaintextDebug) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      codec.EncodeRaw(u[i]);  // range check only
      codec.EncodeRaw(v[i]);
    }
    out.value = kernels::Dot(u, v);
    return out;
  }
  codec.CheckProductTerms(u.size());
  std::vector<FieldElement> eu(u.size()), ev(v.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    eu[i] = codec.Encode(u[i]);
    ev[i] = codec.Encode(v[i]);
  }
  TripleLedger ledger;
  TwoHolderDot dot = RunTwoHolderDot(eu, ev, seed, &ledger);
  out.value = codec.DecodeProduct(dot.result);
  out.server_view = std::move(dot.server_view);
  out.triples_consumed = ledger.consumed;
  return out;
}

}  // namespace vfm

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

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "vfm/errors.h"
#include "vfm/field.h"
#include "vfm/kernels.h"
#include "vfm/rng.h"

namespace vfm {
namespace {

TEST(ShareTest, SharesReconstruct) {
  NoiseStream stream(1);
  std::vector<FieldElement> v;
  for (int i = -5; i <= 5; ++i) v.push_back(FieldElement::FromSigned(i * 1000));
  const auto [s0, s1] = Share(v, stream);
  EXPECT_EQ(Reconstruct(s0, s1), v);
  EXPECT_THROW(Reconstruct(s0, ShareVector{}), InputError);
}

TEST(ShareTest, FirstShareLooksUniform) {
  // Sharing a constant: the top four bits of s0 should fill 16 buckets
  // evenly. 30.58 is the 0.99 quantile of chi-square with 15 df.
  NoiseStream stream(2);
  const int n = 16000;
  const std::vector<FieldElement> v(n, FieldElement::FromSigned(7));
  const auto [s0, s1] = Share(v, stream);
  std::array<int, 16> counts{};
  for (const FieldElement& e : s0.values) ++counts[e.value() >> 123];
  double chi = 0.0;
  const double expected = n / 16.0;
  for (int c : counts) chi += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi, 30.58);
}

TEST(DealerTest, TriplesMultiply) {
  Dealer dealer(3);
  auto [t0, t1] = dealer.Issue(50);
  EXPECT_EQ(dealer.issued(), 50u);
  EXPECT_EQ(t0.batch_id(), t1.batch_id());
  for (std::size_t i = 0; i < 50; ++i) {
    const auto& x = t0.columns();
    const auto& y = t1.columns();
    EXPECT_EQ((x.a[i] + y.a[i]) * (x.b[i] + y.b[i]), x.c[i] + y.c[i]);
  }
}

TEST(DealerTest, BatchCannotBeConsumedTwice) {
  Dealer dealer(3);
  auto [t0, t1] = dealer.Issue(2);
  t0.Consume();
  EXPECT_TRUE(t0.consumed());
  EXPECT_THROW(t0.Consume(), ProtocolError);
  EXPECT_NO_THROW(t1.Consume());
}

std::vector<FieldElement> RandomElements(int n, std::uint64_t seed) {
  NoiseStream s(seed);
  std::vector<FieldElement> out;
  for (int i = 0; i < n; ++i) out.push_back(RandomFieldElement(s));
  return out;
}

TEST(BeaverTest, MulOnSharesGivesElementwiseProduct) {
  const auto x = RandomElements(20, 4), y = RandomElements(20, 5);
  NoiseStream stream(6);
  const auto xs = Share(x, stream);
  const auto ys = Share(y, stream);
  Dealer dealer(7);
  auto [t0, t1] = dealer.Issue(20);
  const auto zs = BeaverMul(xs, ys, t0, t1);
  const auto z = Reconstruct(zs.first, zs.second);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(z[i], x[i] * y[i]);
  EXPECT_TRUE(t0.consumed());
  EXPECT_TRUE(t1.consumed());
}

TEST(BeaverTest, DotSharesSumToDot) {
  const auto x = RandomElements(30, 8), y = RandomElements(30, 9);
  NoiseStream stream(10);
  const auto [x0, x1] = Share(x, stream);
  const auto [y0, y1] = Share(y, stream);
  Dealer dealer(11);
  auto [t0, t1] = dealer.Issue(30);
  const auto o0 = BeaverOpen(x0.values, y0.values, t0.columns());
  const auto o1 = BeaverOpen(x1.values, y1.values, t1.columns());
  const auto opened = CombineOpenings(o0, o1);
  FieldElement expected;
  for (int i = 0; i < 30; ++i) expected += x[i] * y[i];
  EXPECT_EQ(BeaverDotShare(opened, t0.columns(), 0) +
                BeaverDotShare(opened, t1.columns(), 1),
            expected);
}

TEST(SecureDotTest, MatchesPlaintextWithinCodecResolution) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(500), b(500);
  double exact = 0.0;
  for (int i = 0; i < 500; ++i) {
    a[i] = u(gen);
    b[i] = u(gen);
    exact += a[i] * b[i];
  }
  const auto secure = SecureDot(a, b, SecureBackend::kSecretSharing, 13);
  const auto plain = SecureDot(a, b, SecureBackend::kPlaintextDebug, 13);
  // Rounding each factor to 2^-32 moves each product by at most ~2^-32.
  EXPECT_NEAR(secure.value, exact, 500 * std::ldexp(1.0, -31));
  EXPECT_NEAR(plain.value, exact, 1e-12);
  EXPECT_EQ(secure.triples_consumed, 500u);
  EXPECT_TRUE(plain.server_view.empty());
  EXPECT_FALSE(secure.server_view.empty());
}

TEST(SecureDotTest, ServerViewHidesInputs) {
  const std::vector<double> a = {0.5, -0.25, 1.0}, b = {1.0, 1.0, -1.0};
  const FixedPointCodec codec;
  const auto r = SecureDot(a, b, SecureBackend::kSecretSharing, 14, codec);
  for (const FieldElement& e : r.server_view) {
    for (double x : a) EXPECT_NE(e, codec.Encode(x));
    for (double x : b) EXPECT_NE(e, codec.Encode(x));
  }
}

TEST(SecureDotTest, Errors) {
  const std::vector<double> a = {0.5, 0.5}, b = {0.5};
  EXPECT_THROW(SecureDot(a, b, SecureBackend::kSecretSharing, 1), InputError);
  const std::vector<double> big = {2.0};
  EXPECT_THROW(SecureDot(big, big, SecureBackend::kSecretSharing, 1),
               InputError);
  EXPECT_THROW(SecureDot(big, big, SecureBackend::kPlaintextDebug, 1),
               InputError);
  EXPECT_THROW(SecureDot(a, a, SecureBackend::kSecretSharing, 1,
                         FixedPointCodec(62)),
               OverflowError);
}

TEST(SecureDotRawTest, LedgerBalances) {
  const auto x = RandomElements(10, 15), y = RandomElements(10, 16);
  TripleLedger ledger;
  const FieldElement got = SecureDotRaw(x, y, 17, &ledger);
  FieldElement expected;
  for (int i = 0; i < 10; ++i) expected += x[i] * y[i];
  EXPECT_EQ(got, expected);
  EXPECT_TRUE(ledger.Balanced());
  EXPECT_GT(ledger.issued, 0u);
}

TEST(BackendTest, NamesRoundTrip) {
  for (SecureBackend b :
       {SecureBackend::kSecretSharing, SecureBackend::kPlaintextDebug}) {
    EXPECT_EQ(ParseBackend(BackendName(b)), b);
  }
  EXPECT_THROW(ParseBackend("nope"), InputError);
}

}  // namespace
}  // namespace vfm

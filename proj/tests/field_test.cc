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

#include "vfm/field.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vfm/errors.h"

namespace vfm {
namespace {

constexpr uint128 kP = FieldElement::kModulus;

// Schoolbook modular multiplication by doubling; operands are below 2^127 so
// the doubled value fits in 128 bits.
uint128 MulModOracle(uint128 x, uint128 y) {
  uint128 acc = 0;
  x %= kP;
  for (int bit = 0; bit < 128; ++bit) {
    if ((y >> bit) & 1) {
      acc += x;
      if (acc >= kP) acc -= kP;
    }
    x <<= 1;
    if (x >= kP) x -= kP;
  }
  return acc;
}

uint128 Random128(std::mt19937_64& gen) {
  return ((uint128{gen()} << 64) | gen()) % kP;
}

TEST(FieldElementTest, MultiplicationMatchesOracle) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 2000; ++i) {
    const uint128 x = Random128(gen), y = Random128(gen);
    EXPECT_EQ((FieldElement::FromCanonical(x) * FieldElement::FromCanonical(y))
                  .value(),
              MulModOracle(x, y));
  }
  const FieldElement top = FieldElement::FromCanonical(kP - 1);
  EXPECT_EQ((top * top).value(), 1u);  // (-1)^2
}

TEST(FieldElementTest, AdditionWrapsAtModulus) {
  const FieldElement top = FieldElement::FromCanonical(kP - 1);
  EXPECT_EQ((top + FieldElement::FromCanonical(1)).value(), 0u);
  EXPECT_EQ((FieldElement() - FieldElement::FromCanonical(1)).value(), kP - 1);
  EXPECT_EQ((-FieldElement::FromCanonical(5)).value(), kP - 5);
  EXPECT_EQ(FieldElement::FromUnsigned(kP).value(), 0u);
  EXPECT_EQ(FieldElement::FromUnsigned(kP + 3).value(), 3u);
}

TEST(FieldElementTest, CenteredRepresentative) {
  EXPECT_EQ(FieldElement::FromSigned(-1).value(), kP - 1);
  EXPECT_EQ(FieldElement::FromSigned(-1).Centered(), -1);
  EXPECT_EQ(FieldElement::FromSigned(12345).Centered(), 12345);
  EXPECT_EQ(FieldElement::FromCanonical(FieldElement::kHalf).Centered(),
            static_cast<int128>(FieldElement::kHalf));
  EXPECT_EQ(FieldElement::FromCanonical(FieldElement::kHalf + 1).Centered(),
            -static_cast<int128>(FieldElement::kHalf));
}

TEST(FieldElementTest, RingLaws) {
  std::mt19937_64 gen(12);
  for (int i = 0; i < 200; ++i) {
    const auto a = FieldElement::FromCanonical(Random128(gen));
    const auto b = FieldElement::FromCanonical(Random128(gen));
    const auto c = FieldElement::FromCanonical(Random128(gen));
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ((a - b) + b, a);
    EXPECT_EQ(a * b, b * a);
  }
}

TEST(FixedPointCodecTest, EncodeExamples) {
  const FixedPointCodec codec(20);
  EXPECT_EQ(codec.Encode(0.5).value(), uint128{1} << 19);
  EXPECT_EQ(codec.Encode(-1.0).Centered(), -(int128{1} << 20));
  EXPECT_EQ(codec.Encode(0.0).value(), 0u);
  EXPECT_THROW(codec.Encode(1.0 + 1e-9), InputError);
  EXPECT_THROW(codec.Encode(std::nan("")), InputError);
  EXPECT_THROW(FixedPointCodec(0), InputError);
  EXPECT_THROW(FixedPointCodec(63), InputError);
}

TEST(FixedPointCodecTest, RoundTripWithinHalfUlp) {
  for (int f : {8, 20, 32}) {
    const FixedPointCodec codec(f);
    std::mt19937_64 gen(f);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const double x = u(gen);
      EXPECT_LE(std::abs(codec.Decode(codec.Encode(x)) - x),
                std::ldexp(0.5, -f));
    }
  }
}

TEST(FixedPointCodecTest, ProductDecode) {
  const FixedPointCodec codec(20);
  const FieldElement p = codec.Encode(0.5) * codec.Encode(-0.25);
  EXPECT_DOUBLE_EQ(codec.DecodeProduct(p), -0.125);
}

TEST(FixedPointCodecTest, DecodeGuardAtQuarterModulus) {
  const FixedPointCodec codec(32);
  EXPECT_THROW(codec.Decode(FieldElement::FromCanonical(kP >> 2)),
               OverflowError);
  EXPECT_THROW(codec.Decode(-FieldElement::FromCanonical(kP >> 2)),
               OverflowError);
  EXPECT_NO_THROW(codec.Decode(FieldElement::FromCanonical((kP >> 2) - 1)));
}

TEST(FixedPointCodecTest, MaxSafeProductTerms) {
  // Guard is 2^125 - 1; each product can reach 2^(2f).
  EXPECT_EQ(FixedPointCodec(62).MaxSafeProductTerms(), 1u);
  EXPECT_EQ(FixedPointCodec(61).MaxSafeProductTerms(), 7u);
  EXPECT_EQ(FixedPointCodec(32).MaxSafeProductTerms(),
            (std::size_t{1} << 61) - 1);
  try {
    FixedPointCodec(61).CheckProductTerms(8);
    FAIL() << "expected OverflowError";
  } catch (const OverflowError& e) {
    EXPECT_EQ(e.max_safe_terms(), 7u);
  }
}

}  // namespace
}  // namespace vfm

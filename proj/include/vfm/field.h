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

#ifndef VFM_FIELD_H_
#define VFM_FIELD_H_

#include <cstddef>
#include <cstdint>
#include <string>

namespace vfm {

using uint128 = unsigned __int128;
using int128 = __int128;

// Element of GF(p) with p = 2^127 - 1.
class FieldElement {
 public:
  static constexpr uint128 kModulus = (uint128{1} << 127) - 1;
  // floor(p / 2); centered representatives lie in [-kHalf, kHalf].
  static constexpr uint128 kHalf = kModulus >> 1;

  constexpr FieldElement() = default;
  // `value` is reduced mod p.
  static FieldElement FromUnsigned(uint128 value);
  static FieldElement FromSigned(int128 value);
  // `value` must already be < p.
  static constexpr FieldElement FromCanonical(uint128 value) {
    FieldElement e;
    e.value_ = value;
    return e;
  }

  constexpr uint128 value() const { return value_; }
  int128 Centered() const;

  FieldElement operator+(FieldElement other) const;
  FieldElement operator-(FieldElement other) const;
  FieldElement operator-() const;
  FieldElement operator*(FieldElement other) const;
  FieldElement& operator+=(FieldElement other) { return *this = *this + other; }
  FieldElement& operator-=(FieldElement other) { return *this = *this - other; }
  FieldElement& operator*=(FieldElement other) { return *this = *this * other; }

  bool operator==(const FieldElement&) const = default;

  std::string ToHex() const;

 private:
  uint128 value_ = 0;
};

// Signed fixed-point encoding of reals in [-1, 1] into the field with
// 2^fractional_bits as the scale. A product of two encodings carries scale
// 2^(2 * fractional_bits).
class FixedPointCodec {
 public:
  static constexpr int kDefaultFractionalBits = 32;

  explicit FixedPointCodec(int fractional_bits = kDefaultFractionalBits);

  int fractional_bits() const { return fractional_bits_; }

  // round(x * 2^f). Throws InputError if |x| > 1 or x is not finite.
  FieldElement Encode(double x) const;
  std::int64_t EncodeRaw(double x) const;

  // Centered value divided by 2^(f * scale_power). Throws OverflowError when
  // the centered magnitude reaches p/4: the sum was either too large to
  // trust or has wrapped.
  double Decode(FieldElement e, int scale_power = 1) const;
  double DecodeProduct(FieldElement e) const { return Decode(e, 2); }

  // Largest n for which a sum of n products of encoded values stays below
  // the decode guard.
  std::size_t MaxSafeProductTerms() const;
  void CheckProductTerms(std::size_t n) const;

 private:
  int fractional_bits_;
};

}  // namespace vfm

#endif  // VFM_FIELD_H_

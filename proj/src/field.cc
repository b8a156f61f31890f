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

#include <cmath>

#include "vfm/errors.h"

namespace vfm {
namespace {

constexpr uint128 kP = FieldElement::kModulus;
constexpr uint128 kLow64 = ~uint64_t{0};

// Reduces any 128-bit value mod 2^127 - 1 (2^127 == 1).
constexpr uint128 Reduce(uint128 v) {
  v = (v & kP) + (v >> 127);
  return v >= kP ? v - kP : v;
}

constexpr uint128 AddMod(uint128 a, uint128 b) {
  // a, b < 2^127 so the sum fits in 128 bits.
  return Reduce(a + b);
}

// x * 2^64 mod p for x < 2^128.
constexpr uint128 ShiftLeft64Mod(uint128 x) {
  // x = hi * 2^64 + lo; x * 2^64 = hi * 2^128 + lo * 2^64, and 2^128 == 2.
  const uint128 hi = x >> 64;
  const uint128 lo = x & kLow64;
  return AddMod(Reduce(hi << 1), Reduce(lo << 64));
}

constexpr uint128 MulMod(uint128 a, uint128 b) {
  const uint128 a0 = a & kLow64, a1 = a >> 64;
  const uint128 b0 = b & kLow64, b1 = b >> 64;
  // a1, b1 < 2^63, so every partial product fits in 128 bits.
  const uint128 low = Reduce(a0 * b0);
  const uint128 mid = AddMod(Reduce(a0 * b1), Reduce(a1 * b0));
  const uint128 high = Reduce(Reduce(a1 * b1) << 1);  // * 2^128 == * 2
  return AddMod(AddMod(low, ShiftLeft64Mod(mid)), high);
}

}  // namespace

FieldElement FieldElement::FromUnsigned(uint128 value) {
  return FromCanonical(Reduce(value));
}

FieldElement FieldElement::FromSigned(int128 value) {
  if (value >= 0) return FromUnsigned(static_cast<uint128>(value));
  // -value may be 2^127, which Reduce() maps to 1 correctly.
  return -FromUnsigned(static_cast<uint128>(-(value + 1)) + 1);
}

int128 FieldElement::Centered() const {
  return value_ > kHalf ? -static_cast<int128>(kP - value_)
                        : static_cast<int128>(value_);
}

FieldElement FieldElement::operator+(FieldElement other) const {
  return FromCanonical(AddMod(value_, other.value_));
}

FieldElement FieldElement::operator-(FieldElement other) const {
  return *this + (-other);
}

FieldElement FieldElement::operator-() const {
  return FromCanonical(value_ == 0 ? 0 : kP - value_);
}

FieldElement FieldElement::operator*(FieldElement other) const {
  return FromCanonical(MulMod(value_, other.value_));
}

std::string FieldElement::ToHex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(32, '0');
  uint128 v = value_;
  for (int i = 31; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[static_cast<int>(v & 0xF)];
    v >>= 4;
  }
  return out;
}

FixedPointCodec::FixedPointCodec(int fractional_bits)
    : fractional_bits_(fractional_bits) {
  // Two encodings multiplied must stay below the p/4 decode guard.
  if (fractional_bits < 1 || fractional_bits > 62) {
    throw InputError("fixed-point fractional bits must be in [1, 62], got " +
                     std::to_string(fractional_bits));
  }
}

std::int64_t FixedPointCodec::EncodeRaw(double x) const {
  if (!std::isfinite(x) || std::abs(x) > 1.0) {
    throw InputError("fixed-point encode: " + std::to_string(x) +
                     " outside [-1,1]");
  }
  return std::llround(std::ldexp(x, fractional_bits_));
}

FieldElement FixedPointCodec::Encode(double x) const {
  return FieldElement::FromSigned(EncodeRaw(x));
}

double FixedPointCodec::Decode(FieldElement e, int scale_power) const {
  const int128 c = e.Centered();
  const uint128 magnitude =
      c < 0 ? static_cast<uint128>(-c) : static_cast<uint128>(c);
  if (magnitude >= (FieldElement::kModulus >> 2)) {
    throw OverflowError("fixed-point decode: accumulated magnitude reached p/4",
                        MaxSafeProductTerms());
  }
  // Convert the magnitude word by word; splitting a negative value instead
  // cancels badly when it is small.
  const double hi = static_cast<double>(static_cast<uint64_t>(magnitude >> 64));
  const double lo = static_cast<double>(static_cast<uint64_t>(magnitude & kLow64));
  const double value = std::ldexp(hi, 64) + lo;
  return std::ldexp(c < 0 ? -value : value, -fractional_bits_ * scale_power);
}

std::size_t FixedPointCodec::MaxSafeProductTerms() const {
  // Each product of encodings is at most 2^(2f) in magnitude.
  const uint128 guard = FieldElement::kModulus >> 2;
  const uint128 per_term = uint128{1} << (2 * fractional_bits_);
  const uint128 terms = (guard - 1) / per_term;
  const uint128 cap = static_cast<uint128>(~std::size_t{0});
  return static_cast<std::size_t>(terms > cap ? cap : terms);
}

void FixedPointCodec::CheckProductTerms(std::size_t n) const {
  const std::size_t max_terms = MaxSafeProductTerms();
  if (n > max_terms) {
    throw OverflowError("secure dot product of length " + std::to_string(n) +
                            " overflows the field at 2^" +
                            std::to_string(2 * fractional_bits_) +
                            " per product; maximum safe length is " +
                            std::to_string(max_terms),
                        max_terms);
  }
}

}  // namespace vfm

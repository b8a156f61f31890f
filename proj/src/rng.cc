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

#include "vfm/rng.h"

#include <cmath>

namespace vfm {
namespace {

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t domain,
                         std::uint64_t id) {
  return SplitMix(SplitMix(SplitMix(master) ^ domain) ^ id);
}

double NoiseStream::NextUniform() {
  return (static_cast<double>(NextBits() >> 11) + 0.5) * 0x1.0p-53;
}

double NoiseStream::NextUniform(double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(NextBits() >> 11) * 0x1.0p-53);
}

std::uint64_t NoiseStream::NextBelow(std::uint64_t bound) {
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = NextBits();
  } while (x >= limit);
  return x % bound;
}

}  // namespace vfm

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

#ifndef VFM_RNG_H_
#define VFM_RNG_H_

#include <cstdint>
#include <random>

namespace vfm {

// Mixes a master seed with a domain tag and an id into an independent 64-bit
// seed (splitmix64 finalizer applied per input word).
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t domain,
                         std::uint64_t id);

// Domain tags for DeriveSeed so unrelated consumers of one master seed never
// share a substream.
enum class SeedDomain : std::uint64_t {
  kPartyNoise = 1,
  kCoefficientNoise = 2,
  kShares = 3,
  kDealer = 4,
  kReplicate = 5,
  kSplit = 6,
  kDpsgd = 7,
  kData = 8,
  kAudit = 9,
};

inline std::uint64_t DeriveSeed(std::uint64_t master, SeedDomain domain,
                                std::uint64_t id) {
  return DeriveSeed(master, static_cast<std::uint64_t>(domain), id);
}

// Deterministic single-owner random source. The engine is mt19937_64, whose
// output sequence is fixed by the standard; conversions to doubles are done
// here rather than through <random> distributions so results do not depend
// on the standard library vendor.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}
  NoiseStream(std::uint64_t master, SeedDomain domain, std::uint64_t id)
      : NoiseStream(DeriveSeed(master, domain, id)) {}

  NoiseStream(const NoiseStream&) = delete;
  NoiseStream& operator=(const NoiseStream&) = delete;
  NoiseStream(NoiseStream&&) = default;
  NoiseStream& operator=(NoiseStream&&) = default;

  std::uint64_t NextBits() {
    ++draws_;
    return engine_();
  }
  // Uniform on the open interval (0, 1) with 53-bit resolution.
  double NextUniform();
  // Uniform on [lo, hi).
  double NextUniform(double lo, double hi);
  // Uniform integer in [0, bound).
  std::uint64_t NextBelow(std::uint64_t bound);

  std::uint64_t draws() const { return draws_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
};

}  // namespace vfm

#endif  // VFM_RNG_H_

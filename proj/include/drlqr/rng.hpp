// Copyright 2026 The drlqr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace drlqr {

/// Counter-based pseudorandom stream.
///
/// Output i is a keyed hash of the counter value i, so a stream is fully
/// determined by its key and position. `split` derives an independent child
/// key, which is how trials, methods, and evaluation draws get their own
/// streams without sharing state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : key_(mix(seed ^ kSeedSalt)) {}

  /// Child stream keyed by (this key, id). Does not advance this stream.
  Rng split(std::uint64_t id) const { return Rng(key_, id); }
  Rng split(std::string_view label) const { return split(hash_label(label)); }
  Rng split(std::initializer_list<std::uint64_t> path) const {
    Rng out = *this;
    for (auto id : path) out = out.split(id);
    return out;
  }

  std::uint64_t next_u64() {
    const std::uint64_t c = counter_++;
    return mix(mix(key_ + c * kGolden) ^ rotl(key_, 29));
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n), by rejection to avoid modulo bias.
  std::size_t index(std::size_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

  static std::uint64_t hash_label(std::string_view label);

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  Rng(std::uint64_t parent_key, std::uint64_t id)
      : key_(mix(parent_key ^ mix(id + kGolden))) {}

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x243F6A8885A308D3ULL;

  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  // SplitMix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace drlqr

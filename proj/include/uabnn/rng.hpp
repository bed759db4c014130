/* Copyright 2026 The uabnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Portable counter-based random numbers.
//
// Every random quantity in the library is a pure function of a 64-bit key and
// a 64-bit counter, so a stream can be evaluated in any order or in parallel
// and reproduced bit-for-bit by any reimplementation:
//
//   mix(z)          SplitMix64 finalizer:
//                     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//                     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//                     z =  z ^ (z >> 31)
//   bits(key, c)    mix(key + (c + 1) * 0x9E3779B97F4A7C15)
//   uniform(key, c) (bits >> 11) * 2^-53                      in [0, 1)
//   normal(key, c)  Box-Muller, cosine branch, from
//                     u1 = 1 - uniform(key, 2c), u2 = uniform(key, 2c + 1):
//                     sqrt(-2 ln u1) * cos(2 pi u2)
//
// Child keys are derived with derive_seed(parent, index) =
// mix(parent ^ mix(index + 0x632BE59BD9B4E019)); string tags are first hashed
// with 64-bit FNV-1a.

#ifndef UABNN_RNG_HPP_
#define UABNN_RNG_HPP_

#include <cstdint>
#include <string_view>

namespace uabnn {

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return splitmix64_mix(parent ^ splitmix64_mix(index + 0x632BE59BD9B4E019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag) noexcept {
  return derive_seed(parent, fnv1a64(tag));
}

// Stateless view of one stream.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t key() const noexcept { return key_; }

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return splitmix64_mix(key_ + (counter + 1) * 0x9E3779B97F4A7C15ULL);
  }

  double uniform(std::uint64_t counter) const noexcept;
  double normal(std::uint64_t counter) const noexcept;

 private:
  std::uint64_t key_;
};

// Sequential cursor over a CounterRng, for code that consumes draws in order
// (shuffling, initialisation).
class SequentialRng {
 public:
  explicit SequentialRng(std::uint64_t key) noexcept : rng_(key) {}

  std::uint64_t next_bits() noexcept { return rng_.bits(counter_++); }
  double next_uniform() noexcept { return rng_.uniform(counter_++); }
  double next_normal() noexcept { return rng_.normal(counter_++); }
  // Uniform integer in [0, n) by rejection; n > 0.
  std::uint64_t next_index(std::uint64_t n) noexcept;

  std::uint64_t position() const noexcept { return counter_; }

 private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

}  // namespace uabnn

#endif  // UABNN_RNG_HPP_

// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace shallow2d {

// One step of the splitmix64 generator; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

// Seed of the independent stream number `index` under `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Deterministic random stream. Conversions from raw 64-bit words are done
// here rather than through <random> distributions so that streams are
// bit-identical across standard library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller.
  double normal();
  // Complex Gaussian with independent N(0,1) real and imaginary parts.
  std::complex<double> complex_normal();
  // Index drawn with probability proportional to `weights` (non-negative).
  std::size_t categorical(const std::vector<double>& weights);

  std::uint64_t seed() const { return seed_; }
  // Independent child stream number `index`.
  RandomStream child(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace shallow2d

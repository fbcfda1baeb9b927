//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <random>

namespace gpmpc::numerics {

/// Seeded pseudo-random stream. Single owner; equal seeds give equal draws
/// within one build.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// Independent child stream for (seed, index), e.g. one per run or batch.
  static RngStream derive(std::uint64_t seed, std::uint64_t index);
  RngStream child(std::uint64_t index) const { return derive(seed_, index); }

  std::uint64_t seed() const { return seed_; }
  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t next_u64() { return engine_(); }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

} // namespace gpmpc::numerics

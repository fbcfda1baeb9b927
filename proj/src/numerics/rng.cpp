//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "gpmpc/numerics/rng.hpp"

namespace gpmpc::numerics {
namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace

RngStream RngStream::derive(std::uint64_t seed, std::uint64_t index) {
  return RngStream(splitmix64(splitmix64(seed) ^ splitmix64(~index)));
}

} // namespace gpmpc::numerics

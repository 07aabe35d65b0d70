// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "dst/core.hpp"

namespace dst {

/// FNV-1a over bytes; stable across platforms and runs.
std::uint64_t stable_hash(std::string_view bytes);

/// Order-dependent combination of two 64-bit values (splitmix64 finalizer).
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);

/// Seed for one candidate slot: hash of (run seed, problem id, node path, slot).
/// Independent of traversal order, so every search mode sees the same candidate
/// for the same (node, slot).
std::uint64_t seed_context(std::uint64_t run_seed, std::string_view problem_id,
                           const NodePath& path, std::size_t slot);

/// Portable pseudo-random source. Only the engine (mt19937_64) comes from the
/// standard library; the distributions are written out so streams match on
/// every toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal();
  /// Uniformly distributed direction on the unit sphere in R^dim.
  std::vector<double> unit_vector(std::size_t dim);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dst

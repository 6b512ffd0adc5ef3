#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cltlab/lattice.hpp"

namespace cltlab {

/// Randomized instance generator shared by the self-test, the unit tests and
/// the acceptance suite. Coefficients are dyadic rationals k / 2^bits with
/// |k| <= 16, so sums of moderate length are exact in double precision.
struct RandomInstanceOptions {
  std::size_t max_extent = 32;    // a is at most max_extent x max_extent
  std::uint64_t max_points = 256; // #Gamma
  bool allow_point_sets = true;
  int dyadic_bits = 4;
};

Instance random_instance(std::mt19937_64& rng, const RandomInstanceOptions& opts = {});

struct SelfTestResult {
  bool passed = true;
  std::vector<std::string> lines;
};

/// Oracle-equivalence and bound-soundness checks over `instances` random
/// instances, plus the Philox known-answer vectors.
SelfTestResult run_selftest(std::uint64_t seed, std::size_t instances);

}  // namespace cltlab

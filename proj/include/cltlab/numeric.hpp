#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace cltlab {

/// Recursive pairwise summation. The split points depend only on the length,
/// so the result is a deterministic function of the input sequence.
double pairwise_sum(std::span<const double> values);

/// Pairwise sum of f(x) over the sequence without materializing f(x).
template <class F>
double pairwise_sum(std::span<const double> values, F&& f) {
  constexpr std::size_t kBlock = 32;
  if (values.size() <= kBlock) {
    double acc = 0.0;
    for (double v : values) acc += f(v);
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half), f) + pairwise_sum(values.subspan(half), f);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_pdf(double x) {
  constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

/// Upper tail 1 - Phi(x), accurate in the far right tail.
inline double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace cltlab

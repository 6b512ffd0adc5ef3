#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cltlab/innovation.hpp"
#include "cltlab/lattice.hpp"
#include "cltlab/summation.hpp"

namespace cltlab {

/// Worker threads for Monte Carlo: CLT_LAB_THREADS when set to a positive
/// integer, hardware concurrency otherwise. Never affects results.
unsigned worker_count();

/// N replicates of S/sigma = sum b_{r,s} xi_{-r,-s} / sigma. Replicate i draws
/// its innovations, one per nonzero weight in row-major order, from
/// ReplicateStream(seed, i); output is bit-identical for any worker count.
std::vector<double> sample_S(const WeightArray& b, const InnovationModel& f, std::uint64_t n,
                             std::uint64_t seed, unsigned workers = 0);

/// sup_z |F_N(z) - Phi(z)| for the empirical CDF F_N of the samples. Throws
/// InvalidSample on non-finite input.
double empirical_ks(std::span<const double> samples);

/// sqrt(ln(2/alpha) / (2N)).
double dkw_margin(std::uint64_t n, double alpha);

/// Exact sup_z |G(z) - Phi(z)| for a = delta, Gamma = n x n, F = Rademacher,
/// where S/sigma = (2K - n^2)/n with K ~ Binomial(n^2, 1/2).
double exact_ks_iid_rademacher(std::int64_t n);

struct Histogram {
  static constexpr double kLo = -5.0;
  static constexpr double kHi = 5.0;
  static constexpr std::size_t kBins = 201;

  std::vector<std::uint64_t> counts = std::vector<std::uint64_t>(kBins, 0);
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  void add(double x);
};

struct SimulationReport {
  std::string instance_hash;
  std::string distribution;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  double alpha = 0.01;
  double ks_empirical = 0.0;
  double dkw_margin = 0.0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  Histogram histogram;
};

SimulationReport simulate(const WeightArray& b, const InnovationModel& f, std::uint64_t n,
                          std::uint64_t seed, double alpha, std::string instance_hash = {},
                          unsigned workers = 0);

/// Standard error of the sample variance of S/sigma, from its fourth moment
/// 3 + (mu4(F) - 3) sum (b/sigma)^4.
double sample_variance_se(const WeightArray& b, const InnovationModel& f, std::uint64_t n);

struct SweepFamily {
  enum class Kind {
    Square,      // Gamma = {0..n-1}^2
    TwoSquares,  // two n x n squares side by side with an n-column gap (l = 2)
  };
  Kind kind = Kind::Square;
  CoefficientArray a = CoefficientArray::delta();
  std::vector<std::int64_t> sizes;
  /// Norm used for kappa = sigma / ||a||_p; 1 or 2.
  int kappa_norm = 2;
};

Region sweep_region(SweepFamily::Kind kind, std::int64_t n);

struct SweepRow {
  double kappa = 0.0;
  int kappa_norm = 2;
  double rho = 0.0;
  double ks_empirical = 0.0;
  double ks_upper = 0.0;
  std::optional<double> ks_exact;
  double dkw_margin = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  std::size_t rect_count = 0;
  std::string descriptor;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // kappa ascending
  std::vector<std::string> warnings;
};

SweepResult sweep(const SweepFamily& family, const InnovationModel& f, std::uint64_t n,
                  std::uint64_t seed, double alpha = 0.01, unsigned workers = 0);

}  // namespace cltlab

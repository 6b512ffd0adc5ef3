#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cltlab/innovation.hpp"
#include "cltlab/lattice.hpp"
#include "cltlab/summation.hpp"

namespace cltlab {

double lp_norm(const CoefficientArray& a, double p);

/// rho <= ||a||_p (#Gamma)^{1/q} / sigma with 1/p + 1/q = 1.
double crude_bound(const CoefficientArray& a, const Region& gamma, const WeightArray& b, double p);
double crude_bound(const CoefficientArray& a, const Region& gamma, double p);

struct BlockSize {
  std::uint64_t m = 1;
  std::uint64_t n = 1;
};

/// m = n = ceil((sigma / (sqrt(l) ||a||_2))^{4/5}), at least 1.
BlockSize prop2_mn(double sigma, std::size_t rect_count, double norm2);

struct RectangleBound {
  double value = 0.0;         // 12 y^{1/5} + 8 y, y = sqrt(l) ||a||_2 / sigma
  double intermediate = 0.0;  // 2/sqrt(m) + 2/sqrt(n) + 4 m n y at prop2_mn
  BlockSize block;
  std::size_t rect_count = 0;
};

RectangleBound rectangle_bound(double sigma, std::size_t rect_count, double norm2);
/// Throws NotRectUnion for point-set regions.
RectangleBound rectangle_bound(const CoefficientArray& a, const Region& gamma, const WeightArray& b);

/// Normalized weight magnitudes w = |b|/sigma with multiplicities. Lets the
/// Lindeberg functional be evaluated for arrays too large to store densely.
class WeightProfile {
 public:
  struct Entry {
    double weight = 0.0;
    double count = 0.0;
  };

  /// Magnitudes need not be normalized; they are divided by
  /// sqrt(sum count * magnitude^2).
  WeightProfile(const std::vector<double>& magnitudes, const std::vector<double>& counts);
  static WeightProfile from_weights(const WeightArray& b);

  const std::vector<Entry>& entries() const { return entries_; }
  double rho() const { return rho_; }

 private:
  WeightProfile() = default;
  std::vector<Entry> entries_;
  double rho_ = 0.0;
};

/// L(eta) = (1/sigma^2) sum b^2 tau_F(eta sigma / |b|).
double lindeberg_L(const WeightProfile& w, const InnovationModel& f, double eta);
double lindeberg_L(const WeightArray& b, const InnovationModel& f, double eta);

/// eta T^3 / 18 + T^2 L(eta) / 2 + 24 / T.
double smoothing_bound(const WeightProfile& w, const InnovationModel& f, double T, double eta);
double smoothing_bound(const WeightArray& b, const InnovationModel& f, double T, double eta);

struct BoundProbe {
  double T = 0.0;
  double eta = 0.0;
  double value = 0.0;
};

struct KsUpperBound {
  double value = 0.0;
  double T = 0.0;
  double eta = 0.0;
  std::vector<BoundProbe> probes;  // filled only when tracing
};

/// Fixed search grid for ks_upper_bound.
inline constexpr int kTPointsPerDecade = 64;
inline constexpr int kTDecades = 6;
inline constexpr int kEtaDoublings = 40;

/// Minimum of smoothing_bound over T = 10^{i/64}, i = 0..384, and
/// eta = rho 2^k, k = 0..40. The first minimum in (k, i) order wins.
KsUpperBound ks_upper_bound(const WeightProfile& w, const InnovationModel& f, bool trace = false);
KsUpperBound ks_upper_bound(const WeightArray& b, const InnovationModel& f, bool trace = false);

struct Certificate {
  double epsilon = 0.0;
  double T = 0.0;      // 96 / epsilon
  double eta = 0.0;    // 4 epsilon / T^3
  double z = 0.0;      // epsilon / T^2
  double jsharp = 0.0; // J#(z)
  double delta = 0.0;  // min(eta / J#(z), 1)
};

/// Throws InvalidParameter unless 0 < epsilon < 1.
Certificate epsilon_delta_certificate(double epsilon, const HClass& h);

/// Exact T and eta for a decimal epsilon such as "0.1", as reduced fractions.
struct ExactConstants {
  std::string epsilon;
  std::string T;
  std::string eta;
  std::string chain_constant;  // eta T^3 / 18 + 24 / T, which equals 17 epsilon / 36
};
ExactConstants certificate_constants_exact(const std::string& epsilon_decimal);

struct BlockProbe {
  std::uint64_t m = 1;
  std::uint64_t n = 1;
  double q = 0.0;
  double bound = 0.0;
  double q_nested = 0.0;
  double bound_nested = 0.0;
  bool below_rho = false;
};

/// BlockProbe rows for m, n in {1, 2, 4, ..., 128} plus the diagonal point `extra`.
std::vector<BlockProbe> block_probe_grid(const WeightArray& b, std::optional<BlockSize> extra = std::nullopt);

struct BoundReport {
  std::string instance_hash;
  std::string distribution;
  std::uint64_t cardinality = 0;
  double sigma = 0.0;
  double rho = 0.0;
  LatticePoint argmax;
  double norm1 = 0.0;
  double norm2 = 0.0;
  double crude_p1 = 0.0;
  double crude_p2 = 0.0;
  std::optional<RectangleBound> rectangle;
  std::vector<BlockProbe> block_probes;
  KsUpperBound ks_upper;
};

BoundReport make_bound_report(const CoefficientArray& a, const Region& gamma, const WeightArray& b,
                              const InnovationModel& f, bool trace = false);

/// Bounds in the report that fall below rho (relative slack 1e-12). The
/// closed-form probes are excluded; they are audited separately.
std::vector<std::string> soundness_violations(const BoundReport& report);

}  // namespace cltlab

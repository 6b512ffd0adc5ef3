#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cltlab/lattice.hpp"

namespace cltlab {

/// Entries within this relative distance of max|b| count as ties for the
/// argmax, so that the direct and transform routes (which differ by rounding)
/// select the same (r0, s0).
inline constexpr double kArgmaxTieTolerance = 1e-12;

/// The weight array b_{r,s}(a, Gamma) on its support box, with sigma, rho and
/// the argmax location. Immutable; construction fails with DegenerateVariance
/// when sum b^2 is zero.
class WeightArray {
 public:
  WeightArray(LatticePoint origin, std::size_t rows, std::size_t cols, std::vector<double> values);

  LatticePoint origin() const { return origin_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> values() const { return values_; }
  Rect support_box() const;

  double at(std::int64_t r, std::int64_t s) const {
    const std::int64_t i = r - origin_.r;
    const std::int64_t j = s - origin_.s;
    if (i < 0 || j < 0 || i >= static_cast<std::int64_t>(rows_) ||
        j >= static_cast<std::int64_t>(cols_))
      return 0.0;
    return values_[static_cast<std::size_t>(i) * cols_ + static_cast<std::size_t>(j)];
  }

  double sigma_squared() const { return sigma_squared_; }
  double sigma() const { return sigma_; }
  double rho() const { return rho_; }
  double max_abs() const { return max_abs_; }
  LatticePoint argmax() const { return argmax_; }

  /// Nonzero entries in row-major order.
  std::vector<double> nonzero_values() const;

 private:
  LatticePoint origin_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  double sigma_squared_ = 0.0;
  double sigma_ = 0.0;
  double rho_ = 0.0;
  double max_abs_ = 0.0;
  LatticePoint argmax_;
};

struct RhoArgmax {
  double rho = 0.0;
  LatticePoint argmax;
};

/// b by definition: every cell of the support box summed over Gamma in
/// enumeration order. This is the reference route.
WeightArray compute_b_direct(const CoefficientArray& a, const Region& gamma,
                             std::size_t cell_cap = kDefaultCellCap);

/// b as the FFT cross-correlation of a with the indicator of Gamma.
WeightArray compute_b_transform(const CoefficientArray& a, const Region& gamma,
                                std::size_t cell_cap = kDefaultCellCap);

/// rho = max|b|/sigma and the lexicographically smallest maximizer.
RhoArgmax rho_argmax(const WeightArray& b);

/// Delta b_{u,v} = b_{u,v} - b_{u,v-1} - b_{u-1,v} + b_{u-1,v-1}, stored on
/// the support box of b extended by one row and one column.
class SecondDifferenceArray {
 public:
  SecondDifferenceArray(LatticePoint origin, std::size_t rows, std::size_t cols,
                        std::vector<double> values)
      : origin_(origin), rows_(rows), cols_(cols), values_(std::move(values)) {}

  LatticePoint origin() const { return origin_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> values() const { return values_; }
  Rect support_box() const;

  double at(std::int64_t u, std::int64_t v) const {
    const std::int64_t i = u - origin_.r;
    const std::int64_t j = v - origin_.s;
    if (i < 0 || j < 0 || i >= static_cast<std::int64_t>(rows_) ||
        j >= static_cast<std::int64_t>(cols_))
      return 0.0;
    return values_[static_cast<std::size_t>(i) * cols_ + static_cast<std::size_t>(j)];
  }

  /// Sum of Delta b over (r0, r0+dr] x (s0, s0+ds].
  double window_sum(LatticePoint corner, std::int64_t dr, std::int64_t ds) const;

 private:
  LatticePoint origin_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

SecondDifferenceArray second_difference(const WeightArray& b);

/// Q_{m,n} in its closed form:
///   sum_{r=r0+1}^{r0+m} sum_{s=s0+1}^{s0+n} (r-r0)(s-s0) |Delta b_{r,s}|.
double q_mn(const SecondDifferenceArray& db, LatticePoint corner, std::uint64_t m,
            std::uint64_t n);

/// Q_{m,n} as the nested four-fold sum
///   sum_{r=1}^m sum_{s=1}^n sum_{u=r0+1}^{r0+r} sum_{v=s0+1}^{s0+s} |Delta b_{u,v}|,
/// which regroups to weights (m-(u-r0)+1)(n-(v-s0)+1). The two forms differ;
/// only this one is implied by the telescoping identity.
double q_mn_nested(const SecondDifferenceArray& db, LatticePoint corner, std::uint64_t m,
                   std::uint64_t n);

/// 2/sqrt(m) + 2/sqrt(n) + Q_{m,n}/(m n sigma) with the closed-form Q at the
/// argmax of b. Not guaranteed to dominate rho; see rho_bound_mn_nested.
double rho_bound_mn(const WeightArray& b, std::uint64_t m, std::uint64_t n);

/// Same expression with the nested-sum Q; always >= rho.
double rho_bound_mn_nested(const WeightArray& b, std::uint64_t m, std::uint64_t n);

}  // namespace cltlab

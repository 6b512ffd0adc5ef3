#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cltlab {

/// Coordinates are confined to |x| <= kCoordLimit so that differences and
/// extents of valid objects never overflow int64.
inline constexpr std::int64_t kCoordLimit = std::int64_t{1} << 62;

/// Default ceiling on the number of cells of any dense grid.
inline constexpr std::size_t kDefaultCellCap = std::size_t{1} << 30;

struct LatticePoint {
  std::int64_t r = 0;
  std::int64_t s = 0;

  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
};

/// Closed rectangle {row_lo..row_hi} x {col_lo..col_hi} of lattice points.
struct Rect {
  std::int64_t row_lo = 0;
  std::int64_t row_hi = 0;
  std::int64_t col_lo = 0;
  std::int64_t col_hi = 0;

  std::uint64_t rows() const { return static_cast<std::uint64_t>(row_hi - row_lo) + 1; }
  std::uint64_t cols() const { return static_cast<std::uint64_t>(col_hi - col_lo) + 1; }
  bool contains(LatticePoint p) const {
    return p.r >= row_lo && p.r <= row_hi && p.s >= col_lo && p.s <= col_hi;
  }
  bool intersects(const Rect& o) const {
    return row_lo <= o.row_hi && o.row_lo <= row_hi && col_lo <= o.col_hi && o.col_lo <= col_hi;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Finitely supported real array a on Z^2. values() is the dense grid over
/// the support box, row-major in r; a is zero outside the box.
class CoefficientArray {
 public:
  CoefficientArray(LatticePoint origin, std::size_t rows, std::size_t cols,
                   std::vector<double> values, std::size_t cell_cap = kDefaultCellCap);

  static CoefficientArray from_rows(LatticePoint origin,
                                    const std::vector<std::vector<double>>& rows);
  /// a_{0,0} = 1, zero elsewhere.
  static CoefficientArray delta();

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

  /// Smallest box holding every nonzero value.
  CoefficientArray trimmed() const;
  CoefficientArray scaled(double c) const;

 private:
  LatticePoint origin_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

/// Finite subset of Z^2, either a union of pairwise disjoint rectangles or an
/// explicit duplicate-free point list. Enumeration order is rectangle by
/// rectangle (row-major inside each) or the stored point order.
class Region {
 public:
  enum class Kind { RectUnion, PointSet };

  static Region rect_union(std::vector<Rect> rects);
  static Region rectangle(std::int64_t row_lo, std::int64_t row_hi, std::int64_t col_lo,
                          std::int64_t col_hi);
  /// {0..n-1} x {0..n-1}.
  static Region square(std::int64_t n);
  static Region point_set(std::vector<LatticePoint> points);

  Kind kind() const { return kind_; }
  bool is_rect_union() const { return kind_ == Kind::RectUnion; }
  const std::vector<Rect>& rects() const { return rects_; }
  const std::vector<LatticePoint>& points() const { return points_; }

  std::uint64_t cardinality() const { return cardinality_; }
  /// Number of rectangles (l). Throws NotRectUnion for point sets.
  std::size_t rect_count() const;
  Rect bounding_box() const { return bbox_; }
  bool contains(LatticePoint p) const;

  std::vector<LatticePoint> enumerate() const;

  template <class F>
  void for_each_point(F&& f) const {
    if (kind_ == Kind::PointSet) {
      for (const auto& p : points_) f(p);
      return;
    }
    for (const auto& rc : rects_)
      for (std::int64_t j = rc.row_lo; j <= rc.row_hi; ++j)
        for (std::int64_t k = rc.col_lo; k <= rc.col_hi; ++k) f(LatticePoint{j, k});
  }

  friend bool operator==(const Region&, const Region&) = default;

 private:
  Region() = default;
  void finish();

  Kind kind_ = Kind::PointSet;
  std::vector<Rect> rects_;
  std::vector<LatticePoint> points_;
  std::uint64_t cardinality_ = 0;
  Rect bbox_;
};

/// A model instance: coefficients a and summation region Gamma.
struct Instance {
  CoefficientArray a;
  Region gamma;
};

std::uint64_t region_cardinality(const Region& gamma);

/// Shifts every point by `shift`. Throws InvalidRegion when a coordinate would
/// leave the supported range.
Region translate_region(const Region& gamma, LatticePoint shift);

}  // namespace cltlab

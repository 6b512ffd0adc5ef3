#include "cltlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cltlab/error.hpp"

namespace cltlab {
namespace {

bool in_range(std::int64_t x) { return x >= -kCoordLimit && x <= kCoordLimit; }

std::string describe(const Rect& rc) {
  return "[" + std::to_string(rc.row_lo) + "," + std::to_string(rc.row_hi) + "]x[" +
         std::to_string(rc.col_lo) + "," + std::to_string(rc.col_hi) + "]";
}

// Sweep over rectangles ordered by first row; only rectangles whose row span
// is still open can collide with the current one.
void check_disjoint(const std::vector<Rect>& rects) {
  std::vector<std::size_t> order(rects.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return rects[x].row_lo < rects[y].row_lo; });
  std::vector<std::size_t> active;
  for (std::size_t idx : order) {
    const Rect& cur = rects[idx];
    std::erase_if(active, [&](std::size_t a) { return rects[a].row_hi < cur.row_lo; });
    for (std::size_t a : active) {
      if (rects[a].intersects(cur))
        throw InvalidRegion("rectangles " + describe(rects[a]) + " and " + describe(cur) +
                            " overlap");
    }
    active.push_back(idx);
  }
}

}  // namespace

CoefficientArray::CoefficientArray(LatticePoint origin, std::size_t rows, std::size_t cols,
                                   std::vector<double> values, std::size_t cell_cap)
    : origin_(origin), rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0) throw InvalidCoefficients("coefficient grid must be non-empty");
  if (rows_ > cell_cap / cols_)
    throw CapacityExceeded("coefficient grid of " + std::to_string(rows_) + "x" +
                           std::to_string(cols_) + " exceeds the cell cap");
  if (values_.size() != rows_ * cols_)
    throw InvalidCoefficients("coefficient grid has " + std::to_string(values_.size()) +
                              " values, expected " + std::to_string(rows_ * cols_));
  if (!in_range(origin_.r) || !in_range(origin_.s) ||
      !in_range(origin_.r + static_cast<std::int64_t>(rows_) - 1) ||
      !in_range(origin_.s + static_cast<std::int64_t>(cols_) - 1))
    throw InvalidCoefficients("coefficient support outside the coordinate range");
  bool nonzero = false;
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidCoefficients("coefficient values must be finite");
    nonzero = nonzero || v != 0.0;
  }
  if (!nonzero) throw InvalidCoefficients("coefficient array is identically zero");
}

CoefficientArray CoefficientArray::from_rows(LatticePoint origin,
                                             const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty())
    throw InvalidCoefficients("coefficient grid must be non-empty");
  const std::size_t cols = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    if (row.size() != cols) throw InvalidCoefficients("coefficient grid rows are ragged");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return CoefficientArray(origin, rows.size(), cols, std::move(flat));
}

CoefficientArray CoefficientArray::delta() { return CoefficientArray({0, 0}, 1, 1, {1.0}); }

Rect CoefficientArray::support_box() const {
  return Rect{origin_.r, origin_.r + static_cast<std::int64_t>(rows_) - 1, origin_.s,
              origin_.s + static_cast<std::int64_t>(cols_) - 1};
}

CoefficientArray CoefficientArray::trimmed() const {
  std::size_t i_lo = rows_, i_hi = 0, j_lo = cols_, j_hi = 0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if (values_[i * cols_ + j] != 0.0) {
        i_lo = std::min(i_lo, i);
        i_hi = std::max(i_hi, i);
        j_lo = std::min(j_lo, j);
        j_hi = std::max(j_hi, j);
      }
  if (i_lo == 0 && j_lo == 0 && i_hi + 1 == rows_ && j_hi + 1 == cols_) return *this;
  const std::size_t r = i_hi - i_lo + 1;
  const std::size_t c = j_hi - j_lo + 1;
  std::vector<double> v(r * c);
  for (std::size_t i = 0; i < r; ++i)
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>((i + i_lo) * cols_ + j_lo), c,
                v.begin() + static_cast<std::ptrdiff_t>(i * c));
  return CoefficientArray({origin_.r + static_cast<std::int64_t>(i_lo),
                           origin_.s + static_cast<std::int64_t>(j_lo)},
                          r, c, std::move(v));
}

CoefficientArray CoefficientArray::scaled(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return CoefficientArray(origin_, rows_, cols_, std::move(v));
}

Region Region::rect_union(std::vector<Rect> rects) {
  if (rects.empty()) throw InvalidRegion("region must contain at least one rectangle");
  for (const Rect& rc : rects) {
    if (!in_range(rc.row_lo) || !in_range(rc.row_hi) || !in_range(rc.col_lo) ||
        !in_range(rc.col_hi))
      throw InvalidRegion("rectangle " + describe(rc) + " outside the coordinate range");
    if (rc.row_lo > rc.row_hi || rc.col_lo > rc.col_hi)
      throw InvalidRegion("rectangle " + describe(rc) + " is empty");
  }
  check_disjoint(rects);
  Region g;
  g.kind_ = Kind::RectUnion;
  g.rects_ = std::move(rects);
  g.finish();
  return g;
}

Region Region::rectangle(std::int64_t row_lo, std::int64_t row_hi, std::int64_t col_lo,
                         std::int64_t col_hi) {
  return rect_union({Rect{row_lo, row_hi, col_lo, col_hi}});
}

Region Region::square(std::int64_t n) { return rectangle(0, n - 1, 0, n - 1); }

Region Region::point_set(std::vector<LatticePoint> points) {
  if (points.empty()) throw InvalidRegion("region must contain at least one point");
  for (const auto& p : points)
    if (!in_range(p.r) || !in_range(p.s)) throw InvalidRegion("point outside the coordinate range");
  std::vector<LatticePoint> sorted(points);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidRegion("point set contains duplicates");
  Region g;
  g.kind_ = Kind::PointSet;
  g.points_ = std::move(points);
  g.finish();
  return g;
}

void Region::finish() {
  unsigned __int128 count = 0;
  if (kind_ == Kind::PointSet) {
    count = points_.size();
    bbox_ = Rect{points_[0].r, points_[0].r, points_[0].s, points_[0].s};
    for (const auto& p : points_) {
      bbox_.row_lo = std::min(bbox_.row_lo, p.r);
      bbox_.row_hi = std::max(bbox_.row_hi, p.r);
      bbox_.col_lo = std::min(bbox_.col_lo, p.s);
      bbox_.col_hi = std::max(bbox_.col_hi, p.s);
    }
  } else {
    bbox_ = rects_[0];
    for (const auto& rc : rects_) {
      count += static_cast<unsigned __int128>(rc.rows()) * rc.cols();
      bbox_.row_lo = std::min(bbox_.row_lo, rc.row_lo);
      bbox_.row_hi = std::max(bbox_.row_hi, rc.row_hi);
      bbox_.col_lo = std::min(bbox_.col_lo, rc.col_lo);
      bbox_.col_hi = std::max(bbox_.col_hi, rc.col_hi);
    }
  }
  if (count > static_cast<unsigned __int128>(INT64_MAX))
    throw InvalidRegion("region cardinality overflows 64-bit counting");
  cardinality_ = static_cast<std::uint64_t>(count);
}

std::size_t Region::rect_count() const {
  if (kind_ != Kind::RectUnion) throw NotRectUnion("point-set region has no rectangle count");
  return rects_.size();
}

bool Region::contains(LatticePoint p) const {
  if (kind_ == Kind::RectUnion)
    return std::any_of(rects_.begin(), rects_.end(), [&](const Rect& rc) { return rc.contains(p); });
  return std::find(points_.begin(), points_.end(), p) != points_.end();
}

std::vector<LatticePoint> Region::enumerate() const {
  std::vector<LatticePoint> out;
  out.reserve(static_cast<std::size_t>(cardinality_));
  for_each_point([&](LatticePoint p) { out.push_back(p); });
  return out;
}

std::uint64_t region_cardinality(const Region& gamma) { return gamma.cardinality(); }

Region translate_region(const Region& gamma, LatticePoint shift) {
  auto move = [&](std::int64_t x, std::int64_t d) {
    std::int64_t out = 0;
    if (__builtin_add_overflow(x, d, &out) || !in_range(out))
      throw InvalidRegion("translation leaves the coordinate range");
    return out;
  };
  if (gamma.kind() == Region::Kind::PointSet) {
    std::vector<LatticePoint> pts;
    pts.reserve(gamma.points().size());
    for (const auto& p : gamma.points()) pts.push_back({move(p.r, shift.r), move(p.s, shift.s)});
    return Region::point_set(std::move(pts));
  }
  std::vector<Rect> rects;
  rects.reserve(gamma.rects().size());
  for (const auto& rc : gamma.rects())
    rects.push_back({move(rc.row_lo, shift.r), move(rc.row_hi, shift.r), move(rc.col_lo, shift.s),
                     move(rc.col_hi, shift.s)});
  return Region::rect_union(std::move(rects));
}

}  // namespace cltlab

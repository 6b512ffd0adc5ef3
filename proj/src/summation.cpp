#include "cltlab/summation.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

#include "cltlab/error.hpp"
#include "cltlab/numeric.hpp"

namespace cltlab {
namespace {

struct Box {
  LatticePoint origin;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// Support box of b: r ranges over [a.row_lo - G.row_hi, a.row_hi - G.row_lo].
Box weight_box(const CoefficientArray& a, const Region& gamma, std::size_t cell_cap) {
  const Rect sa = a.support_box();
  const Rect sg = gamma.bounding_box();
  const __int128 rows = static_cast<__int128>(sa.row_hi) - sg.row_lo - (sa.row_lo - sg.row_hi) + 1;
  const __int128 cols = static_cast<__int128>(sa.col_hi) - sg.col_lo - (sa.col_lo - sg.col_hi) + 1;
  if (rows * cols > static_cast<__int128>(cell_cap))
    throw CapacityExceeded("weight array would need more than " + std::to_string(cell_cap) +
                           " cells");
  return Box{{sa.row_lo - sg.row_hi, sa.col_lo - sg.col_hi},
             static_cast<std::size_t>(rows),
             static_cast<std::size_t>(cols)};
}

// Smallest n' >= n with no prime factor above 7.
std::size_t smooth_size(std::size_t n) {
  for (std::size_t c = std::max<std::size_t>(n, 1);; ++c) {
    std::size_t x = c;
    for (std::size_t p : {2u, 3u, 5u, 7u})
      while (x % p == 0) x /= p;
    if (x == 1) return c;
  }
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw CapacityExceeded("FFT buffer allocation failed");
  return FftwBuffer<T>(p);
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

WeightArray::WeightArray(LatticePoint origin, std::size_t rows, std::size_t cols,
                         std::vector<double> values)
    : origin_(origin), rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_ || values_.empty())
    throw InvalidParameter("weight grid size does not match its extent");
  sigma_squared_ = pairwise_sum(values_, [](double v) { return v * v; });
  if (!(sigma_squared_ > 0.0))
    throw DegenerateVariance("sum of squared weights is zero; S has no variance");
  if (!std::isfinite(sigma_squared_)) throw DegenerateVariance("variance is not finite");
  sigma_ = std::sqrt(sigma_squared_);
  for (double v : values_) max_abs_ = std::max(max_abs_, std::abs(v));
  rho_ = max_abs_ / sigma_;
  const double tie = max_abs_ * (1.0 - kArgmaxTieTolerance);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (std::abs(values_[i]) >= tie) {
      argmax_ = {origin_.r + static_cast<std::int64_t>(i / cols_),
                 origin_.s + static_cast<std::int64_t>(i % cols_)};
      break;
    }
  }
}

Rect WeightArray::support_box() const {
  return Rect{origin_.r, origin_.r + static_cast<std::int64_t>(rows_) - 1, origin_.s,
              origin_.s + static_cast<std::int64_t>(cols_) - 1};
}

std::vector<double> WeightArray::nonzero_values() const {
  std::vector<double> out;
  for (double v : values_)
    if (v != 0.0) out.push_back(v);
  return out;
}

WeightArray compute_b_direct(const CoefficientArray& a_in, const Region& gamma,
                             std::size_t cell_cap) {
  const CoefficientArray a = a_in.trimmed();
  const Box box = weight_box(a, gamma, cell_cap);
  const std::vector<LatticePoint> pts = gamma.enumerate();
  std::vector<double> values(box.rows * box.cols, 0.0);
  for (std::size_t i = 0; i < box.rows; ++i) {
    const std::int64_t r = box.origin.r + static_cast<std::int64_t>(i);
    for (std::size_t j = 0; j < box.cols; ++j) {
      const std::int64_t s = box.origin.s + static_cast<std::int64_t>(j);
      double acc = 0.0;
      for (const auto& p : pts) acc += a.at(p.r + r, p.s + s);
      values[i * box.cols + j] = acc;
    }
  }
  return WeightArray(box.origin, box.rows, box.cols, std::move(values));
}

WeightArray compute_b_transform(const CoefficientArray& a_in, const Region& gamma,
                                std::size_t cell_cap) {
  const CoefficientArray a = a_in.trimmed();
  const Box box = weight_box(a, gamma, cell_cap);
  const Rect gb = gamma.bounding_box();
  const std::size_t grows = static_cast<std::size_t>(gb.row_hi - gb.row_lo) + 1;
  const std::size_t gcols = static_cast<std::size_t>(gb.col_hi - gb.col_lo) + 1;

  const std::size_t n0 = smooth_size(box.rows);
  const std::size_t n1 = smooth_size(box.cols);
  const std::size_t nh = n1 / 2 + 1;
  if (static_cast<__int128>(n0) * n1 > static_cast<__int128>(cell_cap) ||
      static_cast<__int128>(grows) * gcols > static_cast<__int128>(cell_cap))
    throw CapacityExceeded("transform grid exceeds the cell cap");

  auto fa = fftw_buffer<double>(n0 * n1);
  auto fg = fftw_buffer<double>(n0 * n1);
  auto ca = fftw_buffer<fftw_complex>(n0 * nh);
  auto cg = fftw_buffer<fftw_complex>(n0 * nh);
  std::fill_n(fa.get(), n0 * n1, 0.0);
  std::fill_n(fg.get(), n0 * n1, 0.0);

  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) fa[i * n1 + j] = a.values()[i * a.cols() + j];
  // Reversed indicator: b is then the linear convolution of a with it.
  gamma.for_each_point([&](LatticePoint p) {
    const auto i = static_cast<std::size_t>(gb.row_hi - p.r);
    const auto j = static_cast<std::size_t>(gb.col_hi - p.s);
    fg[i * n1 + j] = 1.0;
  });

  Plan fwd_a, fwd_g, inv;
  {
    std::lock_guard lock(planner_mutex());
    const int d0 = static_cast<int>(n0);
    const int d1 = static_cast<int>(n1);
    fwd_a.reset(fftw_plan_dft_r2c_2d(d0, d1, fa.get(), ca.get(), FFTW_ESTIMATE));
    fwd_g.reset(fftw_plan_dft_r2c_2d(d0, d1, fg.get(), cg.get(), FFTW_ESTIMATE));
    inv.reset(fftw_plan_dft_c2r_2d(d0, d1, ca.get(), fa.get(), FFTW_ESTIMATE));
  }
  if (!fwd_a || !fwd_g || !inv) throw CapacityExceeded("FFT planning failed");
  fftw_execute(fwd_a.get());
  fftw_execute(fwd_g.get());
  for (std::size_t k = 0; k < n0 * nh; ++k) {
    const double re = ca[k][0] * cg[k][0] - ca[k][1] * cg[k][1];
    const double im = ca[k][0] * cg[k][1] + ca[k][1] * cg[k][0];
    ca[k][0] = re;
    ca[k][1] = im;
  }
  fftw_execute(inv.get());

  const double scale = 1.0 / (static_cast<double>(n0) * static_cast<double>(n1));
  std::vector<double> values(box.rows * box.cols);
  for (std::size_t i = 0; i < box.rows; ++i)
    for (std::size_t j = 0; j < box.cols; ++j) values[i * box.cols + j] = fa[i * n1 + j] * scale;
  return WeightArray(box.origin, box.rows, box.cols, std::move(values));
}

RhoArgmax rho_argmax(const WeightArray& b) {
  double max_abs = 0.0;
  for (double v : b.values()) max_abs = std::max(max_abs, std::abs(v));
  const double tie = max_abs * (1.0 - kArgmaxTieTolerance);
  for (std::size_t i = 0; i < b.values().size(); ++i) {
    if (std::abs(b.values()[i]) >= tie)
      return {max_abs / b.sigma(),
              {b.origin().r + static_cast<std::int64_t>(i / b.cols()),
               b.origin().s + static_cast<std::int64_t>(i % b.cols())}};
  }
  return {0.0, b.origin()};
}

Rect SecondDifferenceArray::support_box() const {
  return Rect{origin_.r, origin_.r + static_cast<std::int64_t>(rows_) - 1, origin_.s,
              origin_.s + static_cast<std::int64_t>(cols_) - 1};
}

double SecondDifferenceArray::window_sum(LatticePoint corner, std::int64_t dr,
                                         std::int64_t ds) const {
  const Rect box = support_box();
  const std::int64_t u_lo = std::max(corner.r + 1, box.row_lo);
  const std::int64_t u_hi = std::min(corner.r + dr, box.row_hi);
  const std::int64_t v_lo = std::max(corner.s + 1, box.col_lo);
  const std::int64_t v_hi = std::min(corner.s + ds, box.col_hi);
  std::vector<double> terms;
  for (std::int64_t u = u_lo; u <= u_hi; ++u)
    for (std::int64_t v = v_lo; v <= v_hi; ++v) terms.push_back(at(u, v));
  return pairwise_sum(terms);
}

SecondDifferenceArray second_difference(const WeightArray& b) {
  const std::size_t rows = b.rows() + 1;
  const std::size_t cols = b.cols() + 1;
  std::vector<double> values(rows * cols);
  const LatticePoint o = b.origin();
  for (std::size_t i = 0; i < rows; ++i) {
    const std::int64_t u = o.r + static_cast<std::int64_t>(i);
    for (std::size_t j = 0; j < cols; ++j) {
      const std::int64_t v = o.s + static_cast<std::int64_t>(j);
      values[i * cols + j] = b.at(u, v) - b.at(u, v - 1) - b.at(u - 1, v) + b.at(u - 1, v - 1);
    }
  }
  return SecondDifferenceArray(o, rows, cols, std::move(values));
}

namespace {

// Weighted |Delta b| sum over the window (r0, r0+m] x (s0, s0+n], clipped to
// the stored support; weight(du, dv) receives offsets in [1, m] x [1, n].
template <class Weight>
double weighted_window(const SecondDifferenceArray& db, LatticePoint corner, std::uint64_t m,
                       std::uint64_t n, Weight&& weight) {
  if (m == 0 || n == 0) throw InvalidParameter("m and n must be at least 1");
  const Rect box = db.support_box();
  const auto clip = [](std::int64_t base, std::uint64_t len, std::int64_t hi) {
    const __int128 end = static_cast<__int128>(base) + static_cast<__int128>(len);
    return end > hi ? hi : static_cast<std::int64_t>(end);
  };
  const std::int64_t u_lo = std::max(corner.r + 1, box.row_lo);
  const std::int64_t u_hi = clip(corner.r, m, box.row_hi);
  const std::int64_t v_lo = std::max(corner.s + 1, box.col_lo);
  const std::int64_t v_hi = clip(corner.s, n, box.col_hi);
  std::vector<double> terms;
  for (std::int64_t u = u_lo; u <= u_hi; ++u)
    for (std::int64_t v = v_lo; v <= v_hi; ++v) {
      const double d = db.at(u, v);
      if (d != 0.0)
        terms.push_back(weight(static_cast<double>(u - corner.r), static_cast<double>(v - corner.s)) *
                        std::abs(d));
    }
  return pairwise_sum(terms);
}

}  // namespace

double q_mn(const SecondDifferenceArray& db, LatticePoint corner, std::uint64_t m,
            std::uint64_t n) {
  return weighted_window(db, corner, m, n, [](double du, double dv) { return du * dv; });
}

double q_mn_nested(const SecondDifferenceArray& db, LatticePoint corner, std::uint64_t m,
                   std::uint64_t n) {
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  return weighted_window(db, corner, m, n, [&](double du, double dv) {
    return (md - du + 1.0) * (nd - dv + 1.0);
  });
}

namespace {

double block_bound_value(const WeightArray& b, double q, std::uint64_t m, std::uint64_t n) {
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  return 2.0 / std::sqrt(md) + 2.0 / std::sqrt(nd) + q / (md * nd * b.sigma());
}

}  // namespace

double rho_bound_mn(const WeightArray& b, std::uint64_t m, std::uint64_t n) {
  return block_bound_value(b, q_mn(second_difference(b), b.argmax(), m, n), m, n);
}

double rho_bound_mn_nested(const WeightArray& b, std::uint64_t m, std::uint64_t n) {
  return block_bound_value(b, q_mn_nested(second_difference(b), b.argmax(), m, n), m, n);
}

}  // namespace cltlab

#include <cmath>
#include <map>
#include <random>

#include "doctest.h"

#include "cltlab/error.hpp"
#include "cltlab/fixtures.hpp"
#include "cltlab/summation.hpp"

using namespace cltlab;

namespace {

// Definition of b by exhaustive enumeration: every pair (Gamma point, a cell)
// contributes a_{j+r,k+s} to b_{r,s} with (r,s) = cell - point.
std::map<LatticePoint, double> brute_force_b(const CoefficientArray& a, const Region& gamma) {
  std::map<LatticePoint, double> b;
  for (const auto& p : gamma.enumerate())
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j) {
        const double v = a.values()[i * a.cols() + j];
        if (v == 0.0) continue;
        const LatticePoint rs{a.origin().r + static_cast<std::int64_t>(i) - p.r,
                              a.origin().s + static_cast<std::int64_t>(j) - p.s};
        b[rs] += v;
      }
  return b;
}

double relative_max_error(const WeightArray& x, const WeightArray& y) {
  double diff = 0.0;
  for (std::size_t i = 0; i < x.values().size(); ++i)
    diff = std::max(diff, std::abs(x.values()[i] - y.values()[i]));
  return diff / x.max_abs();
}

}  // namespace

TEST_SUITE("summation") {

TEST_CASE("compute_b_direct: identity case") {
  const auto b = compute_b_direct(CoefficientArray::delta(), Region::point_set({{0, 0}}));
  CHECK(b.rows() == 1);
  CHECK(b.cols() == 1);
  CHECK(b.at(0, 0) == 1.0);
  CHECK(b.sigma() == 1.0);
  CHECK(b.rho() == 1.0);
  CHECK(b.argmax() == LatticePoint{0, 0});
}

TEST_CASE("compute_b_direct: delta over an n x n square") {
  const auto b = compute_b_direct(CoefficientArray::delta(), Region::square(10));
  CHECK(b.origin() == LatticePoint{-9, -9});
  CHECK(b.rows() == 10);
  for (std::int64_t r = -9; r <= 0; ++r)
    for (std::int64_t s = -9; s <= 0; ++s) CHECK(b.at(r, s) == 1.0);
  CHECK(b.at(1, 0) == 0.0);
  CHECK(b.sigma() == 10.0);
  CHECK(b.rho() == 0.1);
  // Every cell ties; the lexicographic minimum wins.
  CHECK(b.argmax() == LatticePoint{-9, -9});
  CHECK(rho_argmax(b).argmax == LatticePoint{-9, -9});
}

TEST_CASE("compute_b_direct: two-term coefficients agree with enumeration") {
  const auto a = CoefficientArray::from_rows({0, 0}, {{1.0}, {-1.0}});  // a00 = 1, a10 = -1
  const Region g = Region::point_set({{0, 0}, {-1, 0}});
  const auto b = compute_b_direct(a, g);
  const auto oracle = brute_force_b(a, g);
  for (const auto& [rs, v] : oracle) CHECK(b.at(rs.r, rs.s) == v);
  CHECK(b.at(0, 0) == 1.0);
  CHECK(b.at(1, 0) == 0.0);
  CHECK(b.at(2, 0) == -1.0);
  CHECK(b.sigma_squared() == 2.0);
}

TEST_CASE("degenerate variance") {
  // A finite a over a nonempty Gamma always leaves its extreme corner intact,
  // so the zero-variance path is reached through the array itself.
  CHECK_THROWS_AS(WeightArray({0, 0}, 1, 2, {0.0, 0.0}), DegenerateVariance);
  const auto a = CoefficientArray::from_rows({0, 0}, {{1.0, -1.0}});
  const auto b = compute_b_direct(a, Region::point_set({{0, 0}, {0, 1}}));
  CHECK(b.at(0, 0) == 0.0);
  CHECK(b.at(0, -1) == 1.0);
  CHECK(b.at(0, 1) == -1.0);
}

TEST_CASE("weight array invariants on random instances") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const Instance inst = random_instance(rng);
    const auto b = compute_b_direct(inst.a, inst.gamma);
    const auto oracle = brute_force_b(inst.a, inst.gamma);
    double sq = 0.0;
    for (const auto& [rs, v] : oracle) {
      CHECK(b.at(rs.r, rs.s) == v);  // dyadic values: exact
      sq += v * v;
    }
    CHECK(b.sigma_squared() == doctest::Approx(sq).epsilon(1e-12));
    CHECK(b.rho() * b.sigma() == doctest::Approx(b.max_abs()).epsilon(1e-15));
    CHECK(std::abs(b.at(b.argmax().r, b.argmax().s)) == b.max_abs());
    CHECK(b.rho() <= 1.0);
    const RhoArgmax ra = rho_argmax(b);
    CHECK(ra.rho == b.rho());
    CHECK(ra.argmax == b.argmax());
  }
}

TEST_CASE("rho_argmax: two opposite spikes") {
  const WeightArray b({0, 0}, 2, 2, {2.0, 0.0, 0.0, -2.0});
  const RhoArgmax ra = rho_argmax(b);
  CHECK(ra.rho == doctest::Approx(2.0 / std::sqrt(8.0)).epsilon(1e-15));
  CHECK(ra.rho == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(ra.argmax == LatticePoint{0, 0});
}

TEST_CASE("compute_b_transform matches the direct route") {
  const auto d = compute_b_transform(CoefficientArray::delta(), Region::point_set({{0, 0}}));
  CHECK(d.at(0, 0) == 1.0);

  std::mt19937_64 rng(12);
  for (int k = 0; k < 200; ++k) {
    const Instance inst = random_instance(rng);
    const auto direct = compute_b_direct(inst.a, inst.gamma);
    const auto fast = compute_b_transform(inst.a, inst.gamma);
    REQUIRE(fast.origin() == direct.origin());
    REQUIRE(fast.rows() == direct.rows());
    REQUIRE(fast.cols() == direct.cols());
    CHECK(relative_max_error(direct, fast) <= 1e-9);
    CHECK(fast.argmax() == direct.argmax());
    CHECK(fast.sigma() == doctest::Approx(direct.sigma()).epsilon(1e-9));
  }
}

TEST_CASE("transform respects the cell cap") {
  CHECK_THROWS_AS(compute_b_transform(CoefficientArray::delta(), Region::square(64), 1000),
                  CapacityExceeded);
  CHECK_THROWS_AS(compute_b_direct(CoefficientArray::delta(), Region::square(64), 1000),
                  CapacityExceeded);
}

TEST_CASE("translation invariance is exact on both routes") {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    const Instance inst = random_instance(rng);
    const LatticePoint shift{static_cast<std::int64_t>(rng() % 41) - 20,
                             static_cast<std::int64_t>(rng() % 41) - 20};
    const Region moved = translate_region(inst.gamma, shift);
    for (auto route : {&compute_b_direct, &compute_b_transform}) {
      const auto b0 = route(inst.a, inst.gamma, kDefaultCellCap);
      const auto b1 = route(inst.a, moved, kDefaultCellCap);
      CHECK(b1.sigma() == b0.sigma());
      CHECK(b1.rho() == b0.rho());
      CHECK(b1.origin() == LatticePoint{b0.origin().r - shift.r, b0.origin().s - shift.s});
      CHECK(b1.argmax() == LatticePoint{b0.argmax().r - shift.r, b0.argmax().s - shift.s});
    }
  }
}

TEST_CASE("scale equivariance") {
  std::mt19937_64 rng(14);
  for (int k = 0; k < 100; ++k) {
    const Instance inst = random_instance(rng);
    const auto b = compute_b_direct(inst.a, inst.gamma);
    for (double c : {3.0, 0.7, 1e3}) {
      const auto bc = compute_b_direct(inst.a.scaled(c), inst.gamma);
      CHECK(bc.sigma() == doctest::Approx(c * b.sigma()).epsilon(1e-12));
      CHECK(bc.rho() == doctest::Approx(b.rho()).epsilon(1e-12));
      CHECK(bc.argmax() == b.argmax());
    }
  }
}

TEST_CASE("second_difference of a delta") {
  const auto b = compute_b_direct(CoefficientArray::delta(), Region::point_set({{0, 0}}));
  const auto db = second_difference(b);
  CHECK(db.rows() == 2);
  CHECK(db.cols() == 2);
  CHECK(db.at(0, 0) == 1.0);
  CHECK(db.at(1, 0) == -1.0);
  CHECK(db.at(0, 1) == -1.0);
  CHECK(db.at(1, 1) == 1.0);
  CHECK(db.at(2, 2) == 0.0);
}

TEST_CASE("second_difference of a constant rectangle lives on the corners") {
  const auto b = compute_b_direct(CoefficientArray::from_rows({0, 0}, {{0.5}}), Region::square(4));
  const auto db = second_difference(b);
  const Rect box = b.support_box();  // [-3, 0]^2
  for (std::int64_t u = box.row_lo - 1; u <= box.row_hi + 2; ++u)
    for (std::int64_t v = box.col_lo - 1; v <= box.col_hi + 2; ++v) {
      double expected = 0.0;
      const bool cu = u == -3 || u == 1;
      const bool cv = v == -3 || v == 1;
      if (cu && cv) expected = u == v ? 0.5 : -0.5;
      CHECK(db.at(u, v) == expected);
    }
}

TEST_CASE("telescoping identity and zero total") {
  std::mt19937_64 rng(15);
  for (int k = 0; k < 100; ++k) {
    const Instance inst = random_instance(rng);
    const auto b = compute_b_direct(inst.a, inst.gamma);
    const auto db = second_difference(b);
    double total = 0.0;
    for (double v : db.values()) total += v;
    CHECK(total == 0.0);
    const Rect box = b.support_box();
    const LatticePoint c0{box.row_lo + static_cast<std::int64_t>(rng() % b.rows()) - 1,
                          box.col_lo + static_cast<std::int64_t>(rng() % b.cols()) - 1};
    const std::int64_t dr = 1 + static_cast<std::int64_t>(rng() % 12);
    const std::int64_t ds = 1 + static_cast<std::int64_t>(rng() % 12);
    const double corners = b.at(c0.r + dr, c0.s + ds) - b.at(c0.r, c0.s + ds) -
                           b.at(c0.r + dr, c0.s) + b.at(c0.r, c0.s);
    CHECK(db.window_sum(c0, dr, ds) == corners);
  }
}

TEST_CASE("q_mn on a delta and on an empty window") {
  const auto b = compute_b_direct(CoefficientArray::delta(), Region::point_set({{0, 0}}));
  const auto db = second_difference(b);
  for (std::uint64_t m : {1u, 2u, 7u, 100u})
    for (std::uint64_t n : {1u, 3u, 100u}) CHECK(q_mn(db, {0, 0}, m, n) == 1.0);
  CHECK(q_mn(db, {5, 5}, 4, 4) == 0.0);
  CHECK_THROWS_AS(q_mn(db, {0, 0}, 0, 1), InvalidParameter);
}

TEST_CASE("q_mn and q_mn_nested against the four-fold sum") {
  std::mt19937_64 rng(16);
  for (int k = 0; k < 60; ++k) {
    const Instance inst = random_instance(rng);
    const auto b = compute_b_direct(inst.a, inst.gamma);
    const auto db = second_difference(b);
    const LatticePoint c0 = b.argmax();
    const std::uint64_t m = 1 + rng() % 9;
    const std::uint64_t n = 1 + rng() % 9;
    double nested = 0.0, closed = 0.0;
    for (std::uint64_t r = 1; r <= m; ++r)
      for (std::uint64_t s = 1; s <= n; ++s)
        for (std::int64_t u = c0.r + 1; u <= c0.r + static_cast<std::int64_t>(r); ++u)
          for (std::int64_t v = c0.s + 1; v <= c0.s + static_cast<std::int64_t>(s); ++v)
            nested += std::abs(db.at(u, v));
    for (std::int64_t u = c0.r + 1; u <= c0.r + static_cast<std::int64_t>(m); ++u)
      for (std::int64_t v = c0.s + 1; v <= c0.s + static_cast<std::int64_t>(n); ++v)
        closed += static_cast<double>((u - c0.r) * (v - c0.s)) * std::abs(db.at(u, v));
    CHECK(q_mn_nested(db, c0, m, n) == doctest::Approx(nested).epsilon(1e-13));
    CHECK(q_mn(db, c0, m, n) == doctest::Approx(closed).epsilon(1e-13));
    // Monotone in each block length.
    CHECK(q_mn(db, c0, m + 1, n) >= q_mn(db, c0, m, n));
    CHECK(q_mn(db, c0, m, n + 1) >= q_mn(db, c0, m, n));
    CHECK(q_mn_nested(db, c0, m + 1, n) >= q_mn_nested(db, c0, m, n));
  }
}

TEST_CASE("rho_bound_mn on the delta instance") {
  const auto b = compute_b_direct(CoefficientArray::delta(), Region::point_set({{0, 0}}));
  CHECK(rho_bound_mn(b, 1, 1) == 5.0);
  // The closed form undershoots rho = 1 once m, n grow.
  CHECK(rho_bound_mn(b, 100, 100) == doctest::Approx(0.4001).epsilon(1e-14));
  CHECK(rho_bound_mn(b, 100, 100) < b.rho());
  // The nested form keeps Q = m n, hence 0.4 + 1.
  CHECK(rho_bound_mn_nested(b, 100, 100) == doctest::Approx(1.4).epsilon(1e-14));
}

TEST_CASE("rho_bound_mn on the i.i.d. square") {
  const auto b = compute_b_direct(CoefficientArray::delta(), Region::square(10));
  // m = n = 7 from the block-size rule; the window (-9, -2]^2 holds no
  // nonzero second difference, so Q = 0.
  CHECK(rho_bound_mn(b, 7, 7) == doctest::Approx(4.0 / std::sqrt(7.0)).epsilon(1e-15));
  CHECK(rho_bound_mn(b, 7, 7) >= b.rho());
}

TEST_CASE("nested bound dominates rho on random instances") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 200; ++k) {
    const Instance inst = random_instance(rng);
    const auto b = compute_b_direct(inst.a, inst.gamma);
    for (std::uint64_t m : {1u, 2u, 5u, 16u, 64u})
      for (std::uint64_t n : {1u, 3u, 16u, 64u})
        CHECK(rho_bound_mn_nested(b, m, n) >= b.rho() * (1.0 - 1e-12));
  }
}

}  // TEST_SUITE

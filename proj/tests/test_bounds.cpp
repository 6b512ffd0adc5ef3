#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"

#include "cltlab/bounds.hpp"
#include "cltlab/error.hpp"
#include "cltlab/fixtures.hpp"
#include "cltlab/innovation.hpp"
#include "cltlab/summation.hpp"

using namespace cltlab;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 1e-14, 50);
}

// 2 * int_c^inf x^2 phi(x) dx, truncated at 40.
double gaussian_tail_quadrature(double c) {
  const double k = 1.0 / std::sqrt(2.0 * M_PI);
  return 2.0 * integrate([&](double x) { return x * x * k * std::exp(-0.5 * x * x); }, c, 40.0);
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("lp_norm") {
  const auto a = CoefficientArray::from_rows({0, 0}, {{3.0, -4.0}});
  CHECK(lp_norm(a, 1.0) == 7.0);
  CHECK(lp_norm(a, 2.0) == 5.0);
  CHECK(lp_norm(a, 1.5) == doctest::Approx(std::pow(std::pow(3.0, 1.5) + 8.0, 1.0 / 1.5)));
  CHECK_THROWS_AS(lp_norm(a, 0.5), InvalidParameter);
  CHECK_THROWS_AS(lp_norm(a, 3.0), InvalidParameter);
}

TEST_CASE("crude_bound examples") {
  const auto d = CoefficientArray::delta();
  CHECK(crude_bound(d, Region::point_set({{0, 0}}), 1.0) == 1.0);
  CHECK(crude_bound(d, Region::point_set({{0, 0}}), 2.0) == 1.0);
  // i.i.d. square: ||a||_2 sqrt(n^2) / n = 1, ||a||_1 * 1 / n = 1/n.
  CHECK(crude_bound(d, Region::square(10), 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(crude_bound(d, Region::square(10), 1.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_THROWS_AS(crude_bound(d, Region::square(2), 2.5), InvalidParameter);
}

TEST_CASE("crude_bound dominates rho") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 300; ++k) {
    const Instance inst = random_instance(rng);
    const auto b = compute_b_direct(inst.a, inst.gamma);
    for (double p : {1.0, 1.25, 1.5, 2.0})
      CHECK(crude_bound(inst.a, inst.gamma, b, p) >= b.rho() * (1.0 - 1e-12));
  }
}

TEST_CASE("prop2_mn") {
  // x = 10 -> 10^{0.8} = 6.3096 -> 7.
  CHECK(prop2_mn(10.0, 1, 1.0).m == 7);
  CHECK(prop2_mn(10.0, 1, 1.0).n == 7);
  // x = 500 -> 144.27 -> 145.
  CHECK(prop2_mn(1000.0, 4, 1.0).m == 145);
  // Small x still gives a block of at least one.
  CHECK(prop2_mn(0.01, 1, 1.0).m == 1);
}

TEST_CASE("rectangle_bound values") {
  const auto r = rectangle_bound(10.0, 1, 1.0);
  CHECK(r.value == doctest::Approx(12.0 * std::pow(0.1, 0.2) + 0.8).epsilon(1e-15));
  CHECK(r.value == doctest::Approx(8.371488133762319).epsilon(1e-14));
  CHECK(r.block.m == 7);
  CHECK(r.intermediate == doctest::Approx(4.0 / std::sqrt(7.0) + 4.0 * 49.0 * 0.1).epsilon(1e-15));
  // The intermediate expression exceeds the closed value here, so no ordering
  // between the two holds in general.
  CHECK(r.intermediate > r.value);

  const auto big = rectangle_bound(1e5, 1, 1.0);
  CHECK(big.value == doctest::Approx(12.0 * std::pow(1e-5, 0.2) + 8e-5).epsilon(1e-14));
  CHECK(big.value == doctest::Approx(1.20008).epsilon(1e-12));

  CHECK_THROWS_AS(rectangle_bound(CoefficientArray::delta(), Region::point_set({{0, 0}}),
                                  compute_b_direct(CoefficientArray::delta(),
                                                   Region::point_set({{0, 0}}))),
                  NotRectUnion);
}

TEST_CASE("rectangle_bound dominates rho on rectangle unions") {
  std::mt19937_64 rng(22);
  RandomInstanceOptions opts;
  opts.allow_point_sets = false;
  for (int k = 0; k < 300; ++k) {
    const Instance inst = random_instance(rng, opts);
    const auto b = compute_b_direct(inst.a, inst.gamma);
    const auto r = rectangle_bound(inst.a, inst.gamma, b);
    CHECK(r.rect_count == inst.gamma.rect_count());
    CHECK(r.value >= b.rho());
    CHECK(r.intermediate >= b.rho());
  }
}

TEST_CASE("Gaussian tail second moment") {
  const auto g = InnovationModel::standard_normal();
  CHECK(g.tail_second_moment(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.tail_second_moment(-1.0) == 1.0);
  CHECK(g.tail_second_moment(0.5) == doctest::Approx(0.9691404042162732705).epsilon(1e-14));
  CHECK(g.tail_second_moment(1.0) == doctest::Approx(0.80125195690120080243).epsilon(1e-14));
  CHECK(g.tail_second_moment(2.0) == doctest::Approx(0.2614641299491106222).epsilon(1e-14));
  CHECK(g.tail_second_moment(4.6) == doctest::Approx(9.7520748407483875546e-5).epsilon(1e-12));
  for (double c : {0.1, 0.7, 1.3, 2.5, 3.3, 5.0})
    CHECK(std::abs(g.tail_second_moment(c) - gaussian_tail_quadrature(c)) <= 1e-10);
}

TEST_CASE("other tail second moments against quadrature") {
  const auto u = InnovationModel::uniform();
  const double h = std::sqrt(3.0);
  for (double c : {0.0, 0.3, 1.0, 1.7}) {
    const double q = 2.0 * integrate([&](double x) { return x * x / (2.0 * h); }, c, h);
    CHECK(u.tail_second_moment(c) == doctest::Approx(q).epsilon(1e-12));
  }
  CHECK(u.tail_second_moment(2.0) == 0.0);

  const auto e = InnovationModel::centered_exponential();
  for (double c : {0.0, 0.4, 0.99, 1.0, 2.5, 6.0}) {
    // x = E - 1 with density exp(-(x+1)) on x > -1.
    const auto dens = [](double x) { return x * x * std::exp(-(x + 1.0)); };
    double q = integrate(dens, c, 60.0);
    if (c < 1.0) q += integrate(dens, -1.0, -c);
    CHECK(e.tail_second_moment(c) == doctest::Approx(q).epsilon(1e-10));
  }

  const auto r = InnovationModel::rademacher();
  CHECK(r.tail_second_moment(0.999) == 1.0);
  CHECK(r.tail_second_moment(1.0) == 0.0);
}

TEST_CASE("innovation moments and discrete validation") {
  for (const auto& f : {InnovationModel::standard_normal(), InnovationModel::rademacher(),
                        InnovationModel::uniform(), InnovationModel::centered_exponential()}) {
    CHECK(f.mean() == 0.0);
    CHECK(f.variance() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(InnovationModel::from_name(f.name()).kind() == f.kind());
  }
  CHECK(InnovationModel::uniform().fourth_moment() == doctest::Approx(1.8));
  CHECK_THROWS_AS(InnovationModel::from_name("cauchy"), InvalidParameter);

  const auto three = InnovationModel::discrete("three", {-2.0, 0.0, 2.0}, {0.125, 0.75, 0.125});
  CHECK(three.variance() == doctest::Approx(1.0));
  CHECK(three.fourth_moment() == doctest::Approx(4.0));
  CHECK(three.tail_second_moment(1.0) == doctest::Approx(1.0));
  CHECK(three.tail_second_moment(2.0) == 0.0);
  CHECK(three.support_edge() == 2.0);
  CHECK_THROWS_AS(InnovationModel::discrete("x", {-1.0, 1.0}, {0.5, 0.6}), InvalidParameter);
  CHECK_THROWS_AS(InnovationModel::discrete("x", {-1.0, 2.0}, {0.5, 0.5}), InvalidParameter);
  CHECK_THROWS_AS(InnovationModel::discrete("x", {-2.0, 2.0}, {0.5, 0.5}), InvalidParameter);
}

TEST_CASE("lindeberg_L") {
  const auto rad = InnovationModel::rademacher();
  const auto delta = compute_b_direct(CoefficientArray::delta(), Region::point_set({{0, 0}}));
  CHECK(lindeberg_L(delta, rad, 0.5) == 1.0);
  CHECK(lindeberg_L(delta, rad, 1.0) == 0.0);
  const auto sq = compute_b_direct(CoefficientArray::delta(), Region::square(10));
  CHECK(lindeberg_L(sq, rad, 0.05) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lindeberg_L(sq, rad, 0.1) == 0.0);
  CHECK(lindeberg_L(sq, InnovationModel::standard_normal(), 0.1) ==
        doctest::Approx(InnovationModel::standard_normal().tail_second_moment(1.0)).epsilon(1e-13));

  std::mt19937_64 rng(23);
  for (int k = 0; k < 100; ++k) {
    const Instance inst = random_instance(rng);
    const auto b = compute_b_direct(inst.a, inst.gamma);
    for (const auto& f : {InnovationModel::standard_normal(), InnovationModel::uniform(),
                          InnovationModel::centered_exponential(), rad}) {
      double prev = 2.0;
      for (double eta : {0.01, 0.05, 0.1, 0.3, 1.0, 3.0}) {
        const double L = lindeberg_L(b, f, eta);
        CHECK(L >= 0.0);
        CHECK(L <= prev + 1e-15);
        CHECK(L <= f.tail_second_moment(eta / b.rho()) + 1e-14);
        prev = L;
      }
    }
  }
}

TEST_CASE("smoothing_bound") {
  const auto rad = InnovationModel::rademacher();
  const auto sq = compute_b_direct(CoefficientArray::delta(), Region::square(20));
  // rho = 0.05 < eta: L vanishes, leaving 0.1 * 24^3 / 18 + 24 / 24.
  CHECK(smoothing_bound(sq, rad, 24.0, 0.1) == doctest::Approx(77.8).epsilon(1e-14));
  const auto delta = compute_b_direct(CoefficientArray::delta(), Region::point_set({{0, 0}}));
  CHECK(smoothing_bound(delta, rad, 24.0, 0.1) == doctest::Approx(77.8 + 288.0).epsilon(1e-14));
}

TEST_CASE("ks_upper_bound is the minimum of its probes") {
  const auto g = InnovationModel::standard_normal();
  const auto b = compute_b_direct(CoefficientArray::delta(), Region::square(30));
  const auto ks = ks_upper_bound(b, g, true);
  REQUIRE(ks.probes.size() == static_cast<std::size_t>((kEtaDoublings + 1) *
                                                       (kTDecades * kTPointsPerDecade + 1)));
  double best = INFINITY;
  for (const auto& p : ks.probes) best = std::min(best, p.value);
  CHECK(ks.value == best);
  CHECK(smoothing_bound(b, g, ks.T, ks.eta) == ks.value);
  for (std::size_t i = 0; i < ks.probes.size(); i += 997) {
    const auto& p = ks.probes[i];
    CHECK(smoothing_bound(b, g, p.T, p.eta) == doctest::Approx(p.value).epsilon(1e-14));
  }
  CHECK(ks_upper_bound(b, g, false).value == ks.value);
  CHECK(ks_upper_bound(b, g, false).probes.empty());
}

TEST_CASE("ks_upper_bound decreases along the i.i.d. squares") {
  for (const auto& f : {InnovationModel::standard_normal(), InnovationModel::rademacher()}) {
    double prev = INFINITY;
    for (std::int64_t n : {10, 30, 100}) {
      const auto b = compute_b_direct(CoefficientArray::delta(), Region::square(n));
      const double v = ks_upper_bound(b, f).value;
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("ks_upper_bound is invariant under scaling of a") {
  std::mt19937_64 rng(24);
  for (int k = 0; k < 20; ++k) {
    const Instance inst = random_instance(rng);
    const auto f = InnovationModel::centered_exponential();
    const auto b = compute_b_direct(inst.a, inst.gamma);
    for (double c : {2.0, 0.25, 1024.0})
      CHECK(ks_upper_bound(compute_b_direct(inst.a.scaled(c), inst.gamma), f).value ==
            ks_upper_bound(b, f).value);
    const double v3 = ks_upper_bound(compute_b_direct(inst.a.scaled(3.0), inst.gamma), f).value;
    CHECK(v3 == doctest::Approx(ks_upper_bound(b, f).value).epsilon(1e-12));
  }
}

TEST_CASE("weight profile agrees with the dense array") {
  std::mt19937_64 rng(25);
  for (int k = 0; k < 50; ++k) {
    const Instance inst = random_instance(rng);
    const auto b = compute_b_direct(inst.a, inst.gamma);
    const auto w = WeightProfile::from_weights(b);
    CHECK(w.rho() == doctest::Approx(b.rho()).epsilon(1e-14));
    const auto g = InnovationModel::standard_normal();
    CHECK(lindeberg_L(w, g, 0.2) == doctest::Approx(lindeberg_L(b, g, 0.2)).epsilon(1e-12));
  }
  const WeightProfile sq({1.0}, {400.0});
  CHECK(sq.rho() == 0.05);
}

TEST_CASE("certificate constants") {
  const HClass rad({InnovationModel::rademacher()});
  const auto c = epsilon_delta_certificate(0.1, rad);
  CHECK(c.T == doctest::Approx(960.0).epsilon(1e-15));
  CHECK(c.eta == doctest::Approx(4.5211226851851852e-10).epsilon(1e-14));
  CHECK(c.eta == doctest::Approx(1.0 / 2211840000.0).epsilon(1e-14));
  CHECK(c.z == doctest::Approx(0.1 / (960.0 * 960.0)).epsilon(1e-15));
  CHECK(c.jsharp == 1.0);
  CHECK(c.delta == c.eta);
  for (double eps : {0.5, 0.1, 0.01, 1e-3, 1e-6}) {
    const auto ce = epsilon_delta_certificate(eps, rad);
    const double chain = ce.eta * ce.T * ce.T * ce.T / 18.0 + 24.0 / ce.T;
    CHECK(std::abs(chain - (2.0 * eps / 9.0 + eps / 4.0)) <= 1e-14 * std::max(1.0, eps));
  }
  CHECK_THROWS_AS(epsilon_delta_certificate(0.0, rad), InvalidParameter);
  CHECK_THROWS_AS(epsilon_delta_certificate(1.0, rad), InvalidParameter);
  CHECK_THROWS_AS(epsilon_delta_certificate(-0.1, rad), InvalidParameter);

  const auto exact = certificate_constants_exact("0.1");
  CHECK(exact.epsilon == "1/10");
  CHECK(exact.T == "960");
  CHECK(exact.eta == "1/2211840000");
  CHECK(exact.chain_constant == "17/360");
  CHECK(certificate_constants_exact("1e-3").T == "96000");
  CHECK_THROWS_AS(certificate_constants_exact("abc"), InvalidParameter);
}

TEST_CASE("envelope inverse") {
  const HClass gauss({InnovationModel::standard_normal()});
  const auto c = epsilon_delta_certificate(0.5, gauss);
  CHECK(c.T == 192.0);
  CHECK(gauss.envelope(c.jsharp) <= c.z);
  CHECK(gauss.envelope(c.jsharp * (1.0 - 1e-9)) > c.z);
  CHECK(c.delta == doctest::Approx(c.eta / c.jsharp).epsilon(1e-15));

  // Rademacher and uniform together: the uniform tail dies at sqrt(3).
  const HClass mix({InnovationModel::rademacher(), InnovationModel::uniform()});
  const double js = mix.envelope_inverse(1e-6);
  CHECK(mix.envelope(js) <= 1e-6);
  CHECK(js > 1.0);
  CHECK(js <= std::sqrt(3.0));
  CHECK_THROWS_AS(mix.envelope_inverse(0.0), InvalidParameter);
  CHECK(mix.envelope_inverse(2.0) == 1.0);
}

TEST_CASE("certificate property on weight profiles") {
  std::mt19937_64 rng(26);
  const std::vector<std::vector<InnovationModel>> classes = {
      {InnovationModel::rademacher()},
      {InnovationModel::standard_normal()},
      {InnovationModel::uniform(), InnovationModel::centered_exponential()},
  };
  for (const auto& members : classes) {
    const HClass h(members);
    for (double eps : {0.5, 0.2, 0.1}) {
      const auto cert = epsilon_delta_certificate(eps, h);
      for (int k = 0; k < 10; ++k) {
        // Random magnitudes in [1/2, 1] with a count large enough that rho <= delta.
        std::vector<double> mags, counts;
        const int parts = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < parts; ++i) {
          mags.push_back(0.5 + 0.5 * std::uniform_real_distribution<double>()(rng));
          counts.push_back(std::ceil(4.0 / (cert.delta * cert.delta)));
        }
        const WeightProfile w(mags, counts);
        REQUIRE(w.rho() <= cert.delta);
        for (const auto& f : members)
          CHECK(smoothing_bound(w, f, cert.T, cert.eta) <= eps);
      }
    }
  }
}

TEST_CASE("bound report soundness and the closed-form audit") {
  std::mt19937_64 rng(27);
  for (int k = 0; k < 100; ++k) {
    const Instance inst = random_instance(rng);
    const auto b = compute_b_direct(inst.a, inst.gamma);
    const auto rep = make_bound_report(inst.a, inst.gamma, b, InnovationModel::standard_normal());
    CHECK(soundness_violations(rep).empty());
    CHECK(rep.rectangle.has_value() == inst.gamma.is_rect_union());
    for (const auto& p : rep.block_probes) CHECK(p.bound_nested >= rep.rho * (1.0 - 1e-12));
  }
  const auto d = CoefficientArray::delta();
  const Region one = Region::point_set({{0, 0}});
  const auto rep = make_bound_report(d, one, compute_b_direct(d, one),
                                     InnovationModel::rademacher());
  bool saw_below = false;
  for (const auto& p : rep.block_probes) saw_below = saw_below || p.below_rho;
  CHECK(saw_below);
  CHECK(soundness_violations(rep).empty());
}

}  // TEST_SUITE

#include "cltlab/bounds.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "cltlab/error.hpp"
#include "cltlab/numeric.hpp"

namespace cltlab {

double lp_norm(const CoefficientArray& a, double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw InvalidParameter("p must lie in [1, 2]");
  if (p == 1.0) return pairwise_sum(a.values(), [](double v) { return std::abs(v); });
  if (p == 2.0)
    return std::sqrt(pairwise_sum(a.values(), [](double v) { return v * v; }));
  return std::pow(pairwise_sum(a.values(), [p](double v) { return std::pow(std::abs(v), p); }),
                  1.0 / p);
}

double crude_bound(const CoefficientArray& a, const Region& gamma, const WeightArray& b,
                   double p) {
  const double norm = lp_norm(a, p);
  // (#Gamma)^{1/q} with 1/q = 1 - 1/p; q = infinity at p = 1.
  const double card_factor =
      p == 1.0 ? 1.0 : std::pow(static_cast<double>(gamma.cardinality()), 1.0 - 1.0 / p);
  return norm * card_factor / b.sigma();
}

double crude_bound(const CoefficientArray& a, const Region& gamma, double p) {
  return crude_bound(a, gamma, compute_b_direct(a, gamma), p);
}

BlockSize prop2_mn(double sigma, std::size_t rect_count, double norm2) {
  if (!(sigma > 0.0) || !(norm2 > 0.0) || rect_count == 0)
    throw InvalidParameter("block size needs sigma > 0, ||a||_2 > 0 and l >= 1");
  const double x = sigma / (std::sqrt(static_cast<double>(rect_count)) * norm2);
  const double m = std::ceil(std::pow(x, 0.8));
  if (!(m < 0x1p62)) throw InvalidParameter("block size overflows");
  const auto mi = static_cast<std::uint64_t>(std::max(m, 1.0));
  return {mi, mi};
}

RectangleBound rectangle_bound(double sigma, std::size_t rect_count, double norm2) {
  RectangleBound out;
  out.rect_count = rect_count;
  out.block = prop2_mn(sigma, rect_count, norm2);
  const double y = std::sqrt(static_cast<double>(rect_count)) * norm2 / sigma;
  out.value = 12.0 * std::pow(y, 0.2) + 8.0 * y;
  const double m = static_cast<double>(out.block.m);
  const double n = static_cast<double>(out.block.n);
  out.intermediate = 2.0 / std::sqrt(m) + 2.0 / std::sqrt(n) + 4.0 * m * n * y;
  return out;
}

RectangleBound rectangle_bound(const CoefficientArray& a, const Region& gamma,
                               const WeightArray& b) {
  if (!gamma.is_rect_union())
    throw NotRectUnion("the rectangle bound needs a union of rectangles");
  return rectangle_bound(b.sigma(), gamma.rect_count(), lp_norm(a, 2.0));
}

WeightProfile::WeightProfile(const std::vector<double>& magnitudes,
                             const std::vector<double>& counts) {
  if (magnitudes.empty() || magnitudes.size() != counts.size())
    throw InvalidParameter("weight profile needs matching non-empty lists");
  std::vector<double> mass(magnitudes.size());
  for (std::size_t i = 0; i < magnitudes.size(); ++i) {
    if (!(counts[i] >= 0.0) || !std::isfinite(magnitudes[i]))
      throw InvalidParameter("weight profile entries must be finite with counts >= 0");
    mass[i] = counts[i] * magnitudes[i] * magnitudes[i];
  }
  const double sigma = std::sqrt(pairwise_sum(mass));
  if (!(sigma > 0.0)) throw DegenerateVariance("weight profile has zero variance");
  for (std::size_t i = 0; i < magnitudes.size(); ++i) {
    if (magnitudes[i] == 0.0 || counts[i] == 0.0) continue;
    const double w = std::abs(magnitudes[i]) / sigma;
    entries_.push_back({w, counts[i]});
    rho_ = std::max(rho_, w);
  }
}

WeightProfile WeightProfile::from_weights(const WeightArray& b) {
  WeightProfile out;
  for (double v : b.values())
    if (v != 0.0) out.entries_.push_back({std::abs(v) / b.sigma(), 1.0});
  out.rho_ = b.rho();
  return out;
}

double lindeberg_L(const WeightProfile& w, const InnovationModel& f, double eta) {
  if (!(eta > 0.0)) throw InvalidParameter("eta must be positive");
  std::vector<double> terms;
  terms.reserve(w.entries().size());
  for (const auto& e : w.entries())
    terms.push_back(e.count * e.weight * e.weight * f.tail_second_moment(eta / e.weight));
  return pairwise_sum(terms);
}

double lindeberg_L(const WeightArray& b, const InnovationModel& f, double eta) {
  return lindeberg_L(WeightProfile::from_weights(b), f, eta);
}

namespace {

double chain(double T, double eta, double L) {
  return eta * T * T * T / 18.0 + 0.5 * T * T * L + 24.0 / T;
}

}  // namespace

double smoothing_bound(const WeightProfile& w, const InnovationModel& f, double T, double eta) {
  if (!(T > 0.0)) throw InvalidParameter("T must be positive");
  return chain(T, eta, lindeberg_L(w, f, eta));
}

double smoothing_bound(const WeightArray& b, const InnovationModel& f, double T, double eta) {
  return smoothing_bound(WeightProfile::from_weights(b), f, T, eta);
}

KsUpperBound ks_upper_bound(const WeightProfile& w, const InnovationModel& f, bool trace) {
  constexpr int kTPoints = kTPointsPerDecade * kTDecades + 1;
  std::vector<double> ts(kTPoints);
  for (int i = 0; i < kTPoints; ++i)
    ts[static_cast<std::size_t>(i)] = std::pow(10.0, static_cast<double>(i) / kTPointsPerDecade);

  KsUpperBound best;
  best.value = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kEtaDoublings; ++k) {
    const double eta = std::ldexp(w.rho(), k);
    const double L = lindeberg_L(w, f, eta);
    for (double T : ts) {
      const double v = chain(T, eta, L);
      if (trace) best.probes.push_back({T, eta, v});
      if (v < best.value) {
        best.value = v;
        best.T = T;
        best.eta = eta;
      }
    }
  }
  return best;
}

KsUpperBound ks_upper_bound(const WeightArray& b, const InnovationModel& f, bool trace) {
  return ks_upper_bound(WeightProfile::from_weights(b), f, trace);
}

Certificate epsilon_delta_certificate(double epsilon, const HClass& h) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidParameter("epsilon must lie in (0, 1)");
  Certificate c;
  c.epsilon = epsilon;
  c.T = 96.0 / epsilon;
  c.eta = 4.0 * epsilon / (c.T * c.T * c.T);
  c.z = epsilon / (c.T * c.T);
  c.jsharp = h.envelope_inverse(c.z);
  c.delta = std::min(c.eta / c.jsharp, 1.0);
  return c;
}

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_rational parse_decimal(const std::string& text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
  cpp_int digits = 0;
  long scale = 0;
  bool seen_digit = false, seen_point = false;
  for (; i < text.size(); ++i) {
    const char ch = text[i];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits = digits * 10 + (ch - '0');
      seen_digit = true;
      if (seen_point) ++scale;
    } else if (ch == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    const std::string exp = text.substr(i + 1);
    std::size_t used = 0;
    long e = 0;
    try {
      e = std::stol(exp, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != exp.size() || std::labs(e) > 4000)
      throw InvalidParameter("malformed decimal '" + text + "'");
    scale -= e;
    i = text.size();
  }
  if (!seen_digit || i != text.size()) throw InvalidParameter("malformed decimal '" + text + "'");
  cpp_int ten_pow = 1;
  for (long k = 0; k < std::labs(scale); ++k) ten_pow *= 10;
  cpp_rational value = scale >= 0 ? cpp_rational(digits, ten_pow) : cpp_rational(digits * ten_pow);
  return negative ? cpp_rational(-value) : value;
}

}  // namespace

ExactConstants certificate_constants_exact(const std::string& epsilon_decimal) {
  const cpp_rational eps = parse_decimal(epsilon_decimal);
  if (!(eps > 0 && eps < 1)) throw InvalidParameter("epsilon must lie in (0, 1)");
  const cpp_rational T = cpp_rational(96) / eps;
  const cpp_rational eta = cpp_rational(4) * eps / (T * T * T);
  const cpp_rational constant = eta * T * T * T / 18 + cpp_rational(24) / T;
  return {eps.str(), T.str(), eta.str(), constant.str()};
}

std::vector<BlockProbe> block_probe_grid(const WeightArray& b, std::optional<BlockSize> extra) {
  const SecondDifferenceArray db = second_difference(b);
  std::vector<BlockSize> sizes;
  for (std::uint64_t m = 1; m <= 128; m *= 2)
    for (std::uint64_t n = 1; n <= 128; n *= 2) sizes.push_back({m, n});
  if (extra) sizes.push_back(*extra);

  std::vector<BlockProbe> out;
  for (const BlockSize& bs : sizes) {
    BlockProbe p;
    p.m = bs.m;
    p.n = bs.n;
    p.q = q_mn(db, b.argmax(), bs.m, bs.n);
    p.q_nested = q_mn_nested(db, b.argmax(), bs.m, bs.n);
    const double md = static_cast<double>(bs.m);
    const double nd = static_cast<double>(bs.n);
    const double head = 2.0 / std::sqrt(md) + 2.0 / std::sqrt(nd);
    p.bound = head + p.q / (md * nd * b.sigma());
    p.bound_nested = head + p.q_nested / (md * nd * b.sigma());
    p.below_rho = p.bound < b.rho();
    out.push_back(p);
  }
  return out;
}

BoundReport make_bound_report(const CoefficientArray& a, const Region& gamma, const WeightArray& b,
                              const InnovationModel& f, bool trace) {
  BoundReport r;
  r.distribution = f.name();
  r.cardinality = gamma.cardinality();
  r.sigma = b.sigma();
  r.rho = b.rho();
  r.argmax = b.argmax();
  r.norm1 = lp_norm(a, 1.0);
  r.norm2 = lp_norm(a, 2.0);
  r.crude_p1 = crude_bound(a, gamma, b, 1.0);
  r.crude_p2 = crude_bound(a, gamma, b, 2.0);
  std::optional<BlockSize> extra;
  if (gamma.is_rect_union()) {
    r.rectangle = rectangle_bound(a, gamma, b);
    extra = r.rectangle->block;
  }
  r.block_probes = block_probe_grid(b, extra);
  r.ks_upper = ks_upper_bound(b, f, trace);
  return r;
}

std::vector<std::string> soundness_violations(const BoundReport& report) {
  std::vector<std::string> out;
  const auto check = [&](const char* name, double bound) {
    if (report.rho > bound * (1.0 + 1e-12))
      out.push_back(std::string(name) + " bound is below rho");
  };
  check("crude_p1", report.crude_p1);
  check("crude_p2", report.crude_p2);
  if (report.rectangle) {
    check("rectangle", report.rectangle->value);
    check("rectangle_intermediate", report.rectangle->intermediate);
  }
  for (const auto& p : report.block_probes) check("block_bound_nested", p.bound_nested);
  return out;
}

}  // namespace cltlab

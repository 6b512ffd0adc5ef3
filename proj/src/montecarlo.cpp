#include "cltlab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>

#include "cltlab/bounds.hpp"
#include "cltlab/error.hpp"
#include "cltlab/numeric.hpp"
#include "cltlab/philox.hpp"

namespace cltlab {
namespace {

// Box-Muller on one Philox block: two uniforms, two normals.
struct NormalDraw {
  double spare = 0.0;
  bool has_spare = false;

  double operator()(ReplicateStream& st) {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    const auto blk = st.next_block();
    const double u1 = ReplicateStream::to_unit((std::uint64_t{blk[0]} << 32) | blk[1]);
    const double u2 = ReplicateStream::to_unit((std::uint64_t{blk[2]} << 32) | blk[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare = radius * std::sin(angle);
    has_spare = true;
    return radius * std::cos(angle);
  }
};

struct RademacherDraw {
  double operator()(ReplicateStream& st) const { return (st.next_u32() >> 31) ? 1.0 : -1.0; }
};

struct UniformDraw {
  double operator()(ReplicateStream& st) const {
    return std::numbers::sqrt3 * (2.0 * st.uniform() - 1.0);
  }
};

struct ExponentialDraw {
  double operator()(ReplicateStream& st) const { return -std::log(st.uniform()) - 1.0; }
};

struct DiscreteDraw {
  const InnovationModel* f;
  double operator()(ReplicateStream& st) const {
    const auto& cum = f->cumulative();
    const double u = st.uniform();
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
    return f->atoms()[idx];
  }
};

template <class Draw>
void fill_range(std::span<const double> weights, std::span<double> out, std::size_t begin,
                std::size_t end, std::uint64_t seed, const Draw& proto) {
  for (std::size_t i = begin; i < end; ++i) {
    ReplicateStream st(seed, i);
    Draw draw = proto;
    double acc = 0.0;
    for (double w : weights) acc += w * draw(st);
    out[i] = acc;
  }
}

template <class Draw>
void fill_parallel(std::span<const double> weights, std::span<double> out, std::uint64_t seed,
                   unsigned workers, const Draw& proto) {
  const std::size_t n = out.size();
  workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    fill_range(weights, out, 0, n, seed, proto);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([=] { fill_range(weights, out, begin, end, seed, proto); });
  }
}

}  // namespace

unsigned worker_count() {
  if (const char* env = std::getenv("CLT_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(std::min(v, 1024L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> sample_S(const WeightArray& b, const InnovationModel& f, std::uint64_t n,
                             std::uint64_t seed, unsigned workers) {
  if (n == 0) throw InvalidParameter("need at least one replicate");
  std::vector<double> weights;
  for (double v : b.values())
    if (v != 0.0) weights.push_back(v / b.sigma());
  if (workers == 0) workers = worker_count();

  std::vector<double> out(n);
  switch (f.kind()) {
    case InnovationModel::Kind::StandardNormal:
      fill_parallel(weights, out, seed, workers, NormalDraw{});
      break;
    case InnovationModel::Kind::Rademacher:
      fill_parallel(weights, out, seed, workers, RademacherDraw{});
      break;
    case InnovationModel::Kind::Uniform:
      fill_parallel(weights, out, seed, workers, UniformDraw{});
      break;
    case InnovationModel::Kind::CenteredExponential:
      fill_parallel(weights, out, seed, workers, ExponentialDraw{});
      break;
    case InnovationModel::Kind::Discrete:
      fill_parallel(weights, out, seed, workers, DiscreteDraw{&f});
      break;
  }
  return out;
}

double empirical_ks(std::span<const double> samples) {
  if (samples.empty()) throw InvalidParameter("empirical KS needs at least one sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  for (double x : sorted)
    if (!std::isfinite(x)) throw InvalidSample("sample is not finite");
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double phi = normal_cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / n - phi;
    const double below = phi - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return d;
}

double dkw_margin(std::uint64_t n, double alpha) {
  if (n == 0) throw InvalidParameter("DKW margin needs N >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must lie in (0, 1)");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

double exact_ks_iid_rademacher(std::int64_t n) {
  if (n < 1) throw InvalidParameter("n must be at least 1");
  if (n > 1000) throw CapacityExceeded("n^2 summands exceed 10^6");
  const std::int64_t total = n * n;
  const long double log_norm = static_cast<long double>(total) * std::log(2.0L);
  const long double lg_total = std::lgamma(static_cast<long double>(total) + 1.0L);
  long double cdf_prev = 0.0L;
  double d = 0.0;
  for (std::int64_t k = 0; k <= total; ++k) {
    const long double log_pmf = lg_total - std::lgamma(static_cast<long double>(k) + 1.0L) -
                                std::lgamma(static_cast<long double>(total - k) + 1.0L) - log_norm;
    const long double cdf = std::min(1.0L, cdf_prev + std::exp(log_pmf));
    const double z = static_cast<double>(2 * k - total) / static_cast<double>(n);
    const double phi = normal_cdf(z);
    // G jumps from cdf_prev to cdf at z; Phi is continuous and increasing.
    d = std::max({d, std::abs(static_cast<double>(cdf) - phi),
                  std::abs(phi - static_cast<double>(cdf_prev))});
    cdf_prev = cdf;
  }
  return d;
}

void Histogram::add(double x) {
  if (x < kLo) {
    ++underflow;
    return;
  }
  if (x > kHi) {
    ++overflow;
    return;
  }
  const double width = (kHi - kLo) / static_cast<double>(kBins);
  const auto idx = std::min(kBins - 1, static_cast<std::size_t>((x - kLo) / width));
  ++counts[idx];
}

SimulationReport simulate(const WeightArray& b, const InnovationModel& f, std::uint64_t n,
                          std::uint64_t seed, double alpha, std::string instance_hash,
                          unsigned workers) {
  SimulationReport r;
  r.instance_hash = std::move(instance_hash);
  r.distribution = f.name();
  r.n_samples = n;
  r.seed = seed;
  r.alpha = alpha;
  r.dkw_margin = dkw_margin(n, alpha);
  const std::vector<double> xs = sample_S(b, f, n, seed, workers);
  r.ks_empirical = empirical_ks(xs);
  r.sample_mean = pairwise_sum(xs) / static_cast<double>(n);
  if (n > 1) {
    const double mean = r.sample_mean;
    r.sample_variance = pairwise_sum(xs, [mean](double x) { return (x - mean) * (x - mean); }) /
                        static_cast<double>(n - 1);
  }
  for (double x : xs) r.histogram.add(x);
  return r;
}

double sample_variance_se(const WeightArray& b, const InnovationModel& f, std::uint64_t n) {
  const double s4 = pairwise_sum(b.values(), [&](double v) {
    const double w = v / b.sigma();
    return w * w * w * w;
  });
  const double mu4 = 3.0 + (f.fourth_moment() - 3.0) * s4;
  return std::sqrt(std::max(mu4 - 1.0, 0.0) / static_cast<double>(n));
}

Region sweep_region(SweepFamily::Kind kind, std::int64_t n) {
  if (kind == SweepFamily::Kind::Square) return Region::square(n);
  return Region::rect_union({Rect{0, n - 1, 0, n - 1}, Rect{0, n - 1, 2 * n, 3 * n - 1}});
}

SweepResult sweep(const SweepFamily& family, const InnovationModel& f, std::uint64_t n,
                  std::uint64_t seed, double alpha, unsigned workers) {
  if (family.kappa_norm != 1 && family.kappa_norm != 2)
    throw InvalidParameter("kappa norm must be 1 or 2");
  const CoefficientArray trimmed = family.a.trimmed();
  const bool point_mass = trimmed.rows() == 1 && trimmed.cols() == 1;
  const double norm = lp_norm(family.a, family.kappa_norm);

  SweepResult out;
  for (std::int64_t size : family.sizes) {
    const std::string name =
        std::string(family.kind == SweepFamily::Kind::Square ? "square" : "two_squares") + "/n=" +
        std::to_string(size);
    try {
      const Region gamma = sweep_region(family.kind, size);
      // The direct route keeps rho bit-exact where it is affordable.
      const double work = static_cast<double>(gamma.cardinality()) *
                          static_cast<double>(gamma.cardinality() + trimmed.rows() * trimmed.cols());
      const WeightArray b = work <= 1e8 ? compute_b_direct(family.a, gamma)
                                        : compute_b_transform(family.a, gamma);
      SweepRow row;
      row.kappa = b.sigma() / norm;
      row.kappa_norm = family.kappa_norm;
      row.rho = b.rho();
      row.n_samples = n;
      row.seed = seed;
      row.rect_count = gamma.rect_count();
      row.descriptor = name;
      row.dkw_margin = dkw_margin(n, alpha);
      row.ks_empirical = empirical_ks(sample_S(b, f, n, seed, workers));
      row.ks_upper = ks_upper_bound(b, f).value;
      if (point_mass && family.kind == SweepFamily::Kind::Square &&
          f.kind() == InnovationModel::Kind::Rademacher && size <= 1000)
        row.ks_exact = exact_ks_iid_rademacher(size);
      out.rows.push_back(std::move(row));
    } catch (const Error& e) {
      out.warnings.push_back(name + ": skipped (" + e.code() + ": " + e.what() + ")");
    }
  }
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const SweepRow& x, const SweepRow& y) { return x.kappa < y.kappa; });
  return out;
}

}  // namespace cltlab

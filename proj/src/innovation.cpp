#include "cltlab/innovation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cltlab/error.hpp"
#include "cltlab/numeric.hpp"

namespace cltlab {
namespace {

const double kSqrt3 = std::sqrt(3.0);

}  // namespace

InnovationModel InnovationModel::standard_normal() { return {Kind::StandardNormal, "normal"}; }
InnovationModel InnovationModel::rademacher() { return {Kind::Rademacher, "rademacher"}; }
InnovationModel InnovationModel::uniform() { return {Kind::Uniform, "uniform"}; }
InnovationModel InnovationModel::centered_exponential() {
  return {Kind::CenteredExponential, "exponential"};
}

InnovationModel InnovationModel::discrete(std::string name, std::vector<double> atoms,
                                          std::vector<double> probabilities) {
  if (atoms.empty() || atoms.size() != probabilities.size())
    throw InvalidParameter("discrete law needs matching non-empty atom and probability lists");
  double total = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i]) || !(probabilities[i] >= 0.0))
      throw InvalidParameter("discrete law has an invalid atom or probability");
    total += probabilities[i];
    m1 += probabilities[i] * atoms[i];
    m2 += probabilities[i] * atoms[i] * atoms[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidParameter("probabilities must sum to 1");
  if (std::abs(m1) > 1e-12) throw InvalidParameter("discrete law must have mean 0");
  if (std::abs(m2 - 1.0) > 1e-12) throw InvalidParameter("discrete law must have variance 1");
  InnovationModel f(Kind::Discrete, std::move(name));
  f.atoms_ = std::move(atoms);
  f.probs_ = std::move(probabilities);
  double acc = 0.0;
  for (double p : f.probs_) f.cumulative_.push_back(acc += p);
  f.cumulative_.back() = 1.0;
  return f;
}

InnovationModel InnovationModel::from_name(std::string_view name) {
  if (name == "normal") return standard_normal();
  if (name == "rademacher") return rademacher();
  if (name == "uniform") return uniform();
  if (name == "exponential") return centered_exponential();
  throw InvalidParameter("unknown innovation law '" + std::string(name) + "'");
}

double InnovationModel::mean() const {
  if (kind_ != Kind::Discrete) return 0.0;
  double m = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) m += probs_[i] * atoms_[i];
  return m;
}

double InnovationModel::variance() const {
  if (kind_ != Kind::Discrete) return 1.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) m2 += probs_[i] * atoms_[i] * atoms_[i];
  return m2 - mean() * mean();
}

double InnovationModel::fourth_moment() const {
  switch (kind_) {
    case Kind::StandardNormal: return 3.0;
    case Kind::Rademacher: return 1.0;
    case Kind::Uniform: return 9.0 / 5.0;
    case Kind::CenteredExponential: return 9.0;
    case Kind::Discrete: {
      double m4 = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i) m4 += probs_[i] * std::pow(atoms_[i], 4);
      return m4;
    }
  }
  return 0.0;
}

double InnovationModel::tail_second_moment(double c) const {
  if (c < 0.0) return variance() + mean() * mean();
  switch (kind_) {
    case Kind::StandardNormal:
      // 2 * int_c^inf x^2 phi(x) dx, integrated by parts.
      return 2.0 * (c * normal_pdf(c) + normal_upper_tail(c));
    case Kind::Rademacher: return c < 1.0 ? 1.0 : 0.0;
    case Kind::Uniform: return c < kSqrt3 ? 1.0 - c * c * c / (3.0 * kSqrt3) : 0.0;
    case Kind::CenteredExponential: {
      // Density e^{-(x+1)} on [-1, inf); antiderivative of x^2 e^{-(x+1)} is
      // -e^{-(x+1)}(x^2 + 2x + 2).
      const double right = std::exp(-(c + 1.0)) * (c * c + 2.0 * c + 2.0);
      if (c >= 1.0) return right;
      const double left = 1.0 - std::exp(c - 1.0) * (c * c - 2.0 * c + 2.0);
      return left + right;
    }
    case Kind::Discrete: {
      double t = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (std::abs(atoms_[i]) > c) t += probs_[i] * atoms_[i] * atoms_[i];
      return t;
    }
  }
  return 0.0;
}

double InnovationModel::support_edge() const {
  switch (kind_) {
    case Kind::Rademacher: return 1.0;
    case Kind::Uniform: return kSqrt3;
    case Kind::Discrete: {
      double e = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (probs_[i] > 0.0) e = std::max(e, std::abs(atoms_[i]));
      return e;
    }
    default: return std::numeric_limits<double>::infinity();
  }
}

HClass::HClass(std::vector<InnovationModel> members) : members_(std::move(members)) {
  if (members_.empty()) throw InvalidParameter("innovation class must be non-empty");
}

double HClass::envelope(double c) const {
  double j = 0.0;
  for (const auto& f : members_) j = std::max(j, f.tail_second_moment(c));
  return j;
}

double HClass::envelope_inverse(double z) const {
  if (!(z > 0.0)) throw InvalidParameter("envelope inverse needs z > 0");
  if (envelope(std::numeric_limits<double>::min()) <= z) return 1.0;
  double hi = 1.0;
  for (int i = 0; envelope(hi) > z; ++i) {
    if (i > 1100) throw InvalidParameter("tail envelope does not fall below z");
    hi *= 2.0;
  }
  double lo = 0.0;
  // Invariant: J(hi) <= z < J(lo).
  for (int i = 0; i < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (envelope(mid) <= z)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace cltlab

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cltlab {

/// A mean-zero, unit-variance innovation law F together with its tail second
/// moment tau_F(c) = int_{|x|>c} x^2 F{dx} (strict inequality).
class InnovationModel {
 public:
  enum class Kind { StandardNormal, Rademacher, Uniform, CenteredExponential, Discrete };

  static InnovationModel standard_normal();
  /// +1 or -1 with probability 1/2 each.
  static InnovationModel rademacher();
  /// Uniform on [-sqrt(3), sqrt(3)].
  static InnovationModel uniform();
  /// E - 1 with E ~ Exp(1).
  static InnovationModel centered_exponential();
  /// Finite-support law; throws InvalidParameter unless the probabilities are
  /// a distribution with mean 0 and variance 1 (to 1e-12).
  static InnovationModel discrete(std::string name, std::vector<double> atoms,
                                  std::vector<double> probabilities);
  /// "normal", "rademacher", "uniform" or "exponential".
  static InnovationModel from_name(std::string_view name);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  double mean() const;
  double variance() const;
  double fourth_moment() const;
  double tail_second_moment(double c) const;
  /// Largest |x| in the support, or +inf for unbounded laws.
  double support_edge() const;

  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& probabilities() const { return probs_; }
  /// Running sums of probabilities(), for inverse-CDF sampling.
  const std::vector<double>& cumulative() const { return cumulative_; }

 private:
  InnovationModel(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Kind kind_;
  std::string name_;
  std::vector<double> atoms_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

/// A finite class H of innovation laws with tail envelope
/// J(c) = max_F tau_F(c) and its generalized inverse J#(z) = inf{c > 0 : J(c) <= z}.
class HClass {
 public:
  explicit HClass(std::vector<InnovationModel> members);

  const std::vector<InnovationModel>& members() const { return members_; }
  double envelope(double c) const;
  /// Bisection for inf{c > 0 : J(c) <= z}; returns a point where J <= z holds.
  /// When J(c) <= z for every c > 0 the infimum is 0 and 1 is returned.
  /// Throws InvalidParameter for z <= 0.
  double envelope_inverse(double z) const;

 private:
  std::vector<InnovationModel> members_;
};

}  // namespace cltlab

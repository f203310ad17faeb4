#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace agechem {

/// Specific growth rate mu(S) of the organisms as a function of substrate.
///
/// Two closed-form families are supported; each exposes the value, the
/// derivative and the Lipschitz constant max mu'(S) over [0, S_in].
class GrowthLaw {
 public:
  enum class Family { kLinear, kMonod };

  /// mu(S) = rate * S.
  static GrowthLaw Linear(double rate);
  /// mu(S) = max_rate * S / (half_saturation + S).
  static GrowthLaw Monod(double max_rate, double half_saturation);

  Family family() const { return family_; }
  double rate() const { return p0_; }             // linear slope or Monod maximum
  double half_saturation() const { return p1_; }  // Monod only

  double value(double s) const;
  double derivative(double s) const;

  // max{mu'(S) : S in [0, s_in]}. Both families are concave, so for an
  // increasing law the maximum sits at S = 0.
  double lipschitz(double s_in) const;

  std::string describe() const;

 private:
  GrowthLaw(Family family, double p0, double p1) : family_(family), p0_(p0), p1_(p1) {}

  Family family_;
  double p0_;
  double p1_;
};

/// coef * exp(-rate * a); a constant is the rate-zero case.
struct ExpTerm {
  double coef = 0.0;
  double rate = 0.0;
};

/// Age-dependent model coefficient (mortality, birth modulus, consumption).
///
/// Constant and exponentially decaying families carry exact metadata. The
/// tabulated family interpolates linearly between knots and extrapolates the
/// end values as constants on both sides.
class AgeFunction {
 public:
  struct Constant {
    double value = 0.0;
  };
  struct ExpDecay {
    double amplitude = 0.0;
    double rate = 0.0;
  };
  struct Tabulated {
    std::vector<double> ages;
    std::vector<double> values;
  };

  AgeFunction() : AgeFunction(Constant{}) {}
  static AgeFunction MakeConstant(double value);
  static AgeFunction MakeExpDecay(double amplitude, double rate);
  /// Knots must be strictly increasing, with at least one knot.
  static AgeFunction MakeTabulated(std::vector<double> ages, std::vector<double> values);

  const std::variant<Constant, ExpDecay, Tabulated>& form() const { return form_; }
  bool is_constant() const { return std::holds_alternative<Constant>(form_); }
  bool is_exp_decay() const { return std::holds_alternative<ExpDecay>(form_); }
  bool is_tabulated() const { return std::holds_alternative<Tabulated>(form_); }

  double value(double a) const;
  // Right derivative for the tabulated family.
  double derivative(double a) const;

  double sup_norm() const;    // sup over [0, inf) of |value|
  double infimum() const;     // inf over [0, inf) of value
  double derivative_sup_norm() const;

  // Exact integral over [a0, a1] of the function (piecewise linear
  // interpolant for the tabulated family). Infinite a1 is allowed and may
  // return +inf.
  double integral(double a0, double a1) const;

  // Closed form valid on [a0, inf), if the function is a single exponential
  // term there. Tabulated functions qualify once a0 is past the last knot.
  std::optional<ExpTerm> tail_form(double a0) const;

  std::string describe() const;

 private:
  explicit AgeFunction(std::variant<Constant, ExpDecay, Tabulated> form) : form_(std::move(form)) {}

  std::variant<Constant, ExpDecay, Tabulated> form_;
};

}  // namespace agechem

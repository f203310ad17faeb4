#include "agechem/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "agechem/errors.hpp"

namespace agechem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Index i of the knot interval [ages[i], ages[i+1]) containing a.
std::size_t KnotInterval(const std::vector<double>& ages, double a) {
  auto it = std::upper_bound(ages.begin(), ages.end(), a);
  return static_cast<std::size_t>(std::distance(ages.begin(), it)) - 1;
}

double TabulatedValue(const AgeFunction::Tabulated& t, double a) {
  if (a <= t.ages.front()) return t.values.front();
  if (a >= t.ages.back()) return t.values.back();
  const std::size_t i = KnotInterval(t.ages, a);
  const double w = (a - t.ages[i]) / (t.ages[i + 1] - t.ages[i]);
  return (1.0 - w) * t.values[i] + w * t.values[i + 1];
}

double TabulatedIntegral(const AgeFunction::Tabulated& t, double a0, double a1) {
  if (a1 <= a0) return 0.0;
  double total = 0.0;
  if (a0 < t.ages.front()) {
    const double hi = std::min(a1, t.ages.front());
    total += t.values.front() * (hi - a0);
    a0 = hi;
  }
  if (a1 > t.ages.back()) {
    const double lo = std::max(a0, t.ages.back());
    if (std::isinf(a1)) {
      total += t.values.back() == 0.0 ? 0.0 : std::copysign(kInf, t.values.back());
    } else {
      total += t.values.back() * (a1 - lo);
    }
    a1 = lo;
  }
  if (a1 <= a0) return total;
  // Piecewise linear: trapezoid on each sub-interval is exact.
  std::size_t i = KnotInterval(t.ages, a0);
  double left = a0;
  while (left < a1 && i + 1 < t.ages.size()) {
    const double right = std::min(a1, t.ages[i + 1]);
    total += 0.5 * (TabulatedValue(t, left) + TabulatedValue(t, right)) * (right - left);
    left = right;
    ++i;
  }
  return total;
}

}  // namespace

GrowthLaw GrowthLaw::Linear(double rate) { return GrowthLaw(Family::kLinear, rate, 0.0); }

GrowthLaw GrowthLaw::Monod(double max_rate, double half_saturation) {
  if (!(half_saturation > 0.0)) {
    throw InputError("Monod half-saturation constant must be positive");
  }
  return GrowthLaw(Family::kMonod, max_rate, half_saturation);
}

double GrowthLaw::value(double s) const {
  switch (family_) {
    case Family::kLinear:
      return p0_ * s;
    case Family::kMonod:
      return p0_ * s / (p1_ + s);
  }
  return 0.0;
}

double GrowthLaw::derivative(double s) const {
  switch (family_) {
    case Family::kLinear:
      return p0_;
    case Family::kMonod: {
      const double d = p1_ + s;
      return p0_ * p1_ / (d * d);
    }
  }
  return 0.0;
}

double GrowthLaw::lipschitz(double s_in) const {
  // Monod derivative is monotone in S, so the extremes are at the endpoints.
  return std::max(derivative(0.0), derivative(s_in));
}

std::string GrowthLaw::describe() const {
  std::ostringstream os;
  if (family_ == Family::kLinear) {
    os << "linear(c=" << p0_ << ")";
  } else {
    os << "monod(m=" << p0_ << ", a_half=" << p1_ << ")";
  }
  return os.str();
}

AgeFunction AgeFunction::MakeConstant(double value) { return AgeFunction(Constant{value}); }

AgeFunction AgeFunction::MakeExpDecay(double amplitude, double rate) {
  return AgeFunction(ExpDecay{amplitude, rate});
}

AgeFunction AgeFunction::MakeTabulated(std::vector<double> ages, std::vector<double> values) {
  if (ages.empty() || ages.size() != values.size()) {
    throw InputError("tabulated function needs matching, non-empty ages and values");
  }
  for (std::size_t i = 1; i < ages.size(); ++i) {
    if (!(ages[i] > ages[i - 1])) throw InputError("tabulated ages must be strictly increasing");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InputError("tabulated values must be finite");
  }
  return AgeFunction(Tabulated{std::move(ages), std::move(values)});
}

double AgeFunction::value(double a) const {
  return std::visit(Overloaded{[](const Constant& c) { return c.value; },
                               [a](const ExpDecay& e) { return e.amplitude * std::exp(-e.rate * a); },
                               [a](const Tabulated& t) { return TabulatedValue(t, a); }},
                    form_);
}

double AgeFunction::derivative(double a) const {
  return std::visit(
      Overloaded{[](const Constant&) { return 0.0; },
                 [a](const ExpDecay& e) { return -e.rate * e.amplitude * std::exp(-e.rate * a); },
                 [a](const Tabulated& t) {
                   if (t.ages.size() < 2 || a < t.ages.front() || a >= t.ages.back()) return 0.0;
                   const std::size_t i = KnotInterval(t.ages, a);
                   return (t.values[i + 1] - t.values[i]) / (t.ages[i + 1] - t.ages[i]);
                 }},
      form_);
}

double AgeFunction::sup_norm() const {
  return std::visit(Overloaded{[](const Constant& c) { return std::abs(c.value); },
                               [](const ExpDecay& e) {
                                 if (e.rate < 0.0 && e.amplitude != 0.0) return kInf;
                                 return std::abs(e.amplitude);
                               },
                               [](const Tabulated& t) {
                                 double m = 0.0;
                                 for (double v : t.values) m = std::max(m, std::abs(v));
                                 return m;
                               }},
                    form_);
}

double AgeFunction::infimum() const {
  return std::visit(Overloaded{[](const Constant& c) { return c.value; },
                               [](const ExpDecay& e) {
                                 if (e.rate == 0.0) return e.amplitude;
                                 if (e.rate > 0.0) return std::min(0.0, e.amplitude);
                                 return e.amplitude > 0.0 ? e.amplitude : -kInf;
                               },
                               [](const Tabulated& t) {
                                 return *std::min_element(t.values.begin(), t.values.end());
                               }},
                    form_);
}

double AgeFunction::derivative_sup_norm() const {
  return std::visit(Overloaded{[](const Constant&) { return 0.0; },
                               [](const ExpDecay& e) {
                                 if (e.rate < 0.0 && e.amplitude != 0.0) return kInf;
                                 return std::abs(e.rate * e.amplitude);
                               },
                               [](const Tabulated& t) {
                                 double m = 0.0;
                                 for (std::size_t i = 0; i + 1 < t.ages.size(); ++i) {
                                   m = std::max(m, std::abs((t.values[i + 1] - t.values[i]) /
                                                            (t.ages[i + 1] - t.ages[i])));
                                 }
                                 return m;
                               }},
                    form_);
}

double AgeFunction::integral(double a0, double a1) const {
  if (a1 <= a0) return 0.0;
  return std::visit(
      Overloaded{[&](const Constant& c) {
                   if (std::isinf(a1)) return c.value == 0.0 ? 0.0 : std::copysign(kInf, c.value);
                   return c.value * (a1 - a0);
                 },
                 [&](const ExpDecay& e) {
                   if (e.amplitude == 0.0) return 0.0;
                   if (e.rate == 0.0) {
                     if (std::isinf(a1)) return std::copysign(kInf, e.amplitude);
                     return e.amplitude * (a1 - a0);
                   }
                   if (std::isinf(a1)) {
                     if (e.rate < 0.0) return std::copysign(kInf, e.amplitude);
                     return e.amplitude * std::exp(-e.rate * a0) / e.rate;
                   }
                   // A e^{-k a0} (1 - e^{-k (a1 - a0)}) / k, written to stay accurate
                   // for small k (a1 - a0).
                   return -e.amplitude * std::exp(-e.rate * a0) * std::expm1(-e.rate * (a1 - a0)) /
                          e.rate;
                 },
                 [&](const Tabulated& t) { return TabulatedIntegral(t, a0, a1); }},
      form_);
}

std::optional<ExpTerm> AgeFunction::tail_form(double a0) const {
  return std::visit(Overloaded{[](const Constant& c) -> std::optional<ExpTerm> {
                                 return ExpTerm{c.value, 0.0};
                               },
                               [](const ExpDecay& e) -> std::optional<ExpTerm> {
                                 return ExpTerm{e.amplitude, e.rate};
                               },
                               [a0](const Tabulated& t) -> std::optional<ExpTerm> {
                                 if (a0 >= t.ages.back()) return ExpTerm{t.values.back(), 0.0};
                                 return std::nullopt;
                               }},
                    form_);
}

std::string AgeFunction::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{[&](const Constant& c) { os << "constant(" << c.value << ")"; },
                        [&](const ExpDecay& e) {
                          os << "exp_decay(amplitude=" << e.amplitude << ", rate=" << e.rate << ")";
                        },
                        [&](const Tabulated& t) { os << "tabulated(" << t.ages.size() << " knots)"; }},
             form_);
  return os.str();
}

}  // namespace agechem

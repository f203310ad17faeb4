#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "agechem/functions.hpp"

namespace agechem {

enum class QuadratureRule {
  kTrapezoid,
  // Trapezoid with five Gregory end weights at each side; exact for
  // polynomials of degree 5. Falls back to the trapezoid below 12 nodes.
  kGregory,
};

/// Uniform age grid a_i = i * step on [0, a_max] with a quadrature rule.
class AgeGrid {
 public:
  AgeGrid(double a_max, std::size_t n, QuadratureRule rule = QuadratureRule::kTrapezoid);

  std::size_t size() const { return n_; }
  double step() const { return step_; }
  double a_max() const { return a_max_; }
  double age(std::size_t i) const { return static_cast<double>(i) * step_; }
  QuadratureRule rule() const { return rule_; }

  double weight(std::size_t i) const;
  std::vector<double> weights() const;

  double integrate(std::span<const double> values) const;
  std::vector<double> sample(const AgeFunction& fn) const;

  AgeGrid with_rule(QuadratureRule rule) const { return AgeGrid(a_max_, n_, rule); }

 private:
  double a_max_;
  std::size_t n_;
  double step_;
  QuadratureRule rule_;
};

}  // namespace agechem

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "agechem/functions.hpp"
#include "agechem/grid.hpp"
#include "agechem/model.hpp"

namespace agechem {

/// r(a) = exp(-D a - int_0^a beta) on the model grid. The beta integral uses
/// the trapezoid rule per cell, so r[i+1] = r[i] * decay_factors()[i].
std::vector<double> survivor_profile(const ModelParams& params);

/// exp(-(D + beta_bar_i) * step) with beta_bar_i the trapezoid average of
/// beta on [a_i, a_{i+1}]; size n_age - 1.
std::vector<double> decay_factors(const ModelParams& params);

/// Closed form of r beyond a_max when beta is constant there.
std::optional<ExpTerm> survivor_tail(const ModelParams& params, double r_at_a_max);

struct MomentOptions {
  bool include_tail = true;
  // Profile beyond the grid as coef * exp(-rate * a); enables the exact tail.
  std::optional<ExpTerm> profile_tail;
  // Relative bound on the estimated tail when no closed form is available.
  double tail_tol = 1e-8;
};

struct MomentResult {
  double value = 0.0;  // grid quadrature plus tail
  double tail = 0.0;
  bool tail_exact = false;
};

/// <weight, profile> over [0, inf). Throws DomainError("a_max too small")
/// when an estimated tail exceeds tail_tol relative to the grid part.
MomentResult moment_detail(const AgeFunction& weight, std::span<const double> profile, const AgeGrid& grid,
                           const MomentOptions& options = {});
double moment(const AgeFunction& weight, std::span<const double> profile, const AgeGrid& grid,
              const MomentOptions& options = {});

/// Exact <Y1 e^{-k1 a}, Y2 e^{-k2 a}> over [0, inf).
double exp_product_integral(const ExpTerm& u, const ExpTerm& v);

enum class EquilibriumScheme {
  // Gregory quadrature with the analytic tail: the accurate continuum values.
  kAccurate,
  // Trapezoid on the truncated grid: an exact fixed point of the simulator.
  kSchemeConsistent,
};

struct Equilibrium {
  double s_star = 0.0;
  double f_star0 = 0.0;
  double mu_star = 0.0;  // mu(S*)
  std::vector<double> r;
  double kr = 0.0;
  double qr = 0.0;
  double theta = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double r_norm1 = 0.0;
  double s_in = 0.0;
  EquilibriumScheme scheme = EquilibriumScheme::kAccurate;
  QuadratureRule rule = QuadratureRule::kGregory;
  bool include_tail = true;
  std::optional<ExpTerm> r_tail;
  int bisection_iterations = 0;

  double f_star(std::size_t i) const { return f_star0 * r[i]; }
  std::vector<double> f_star_profile() const;
  /// Moment options matching the quadrature this equilibrium was built with.
  MomentOptions moment_options() const;
  /// g(S) = mu(S) / mu(S*).
  double g(const GrowthLaw& mu, double s) const { return mu.value(s) / mu_star; }
};

/// Solves mu(S*) <k, r> = 1 by bisection on (0, S_in) to 1e-12 relative.
/// Throws DomainError("no interior equilibrium (washout regime)").
Equilibrium solve_equilibrium(const ModelParams& params,
                              EquilibriumScheme scheme = EquilibriumScheme::kAccurate);

}  // namespace agechem

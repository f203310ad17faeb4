#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "agechem/functions.hpp"
#include "agechem/grid.hpp"

namespace agechem {

/// Chemostat data: growth law, mortality beta, birth modulus k, consumption
/// q, inlet concentration, dilution rate and the age-domain truncation.
class ModelParams {
 public:
  ModelParams(GrowthLaw mu, AgeFunction beta, AgeFunction k, AgeFunction q, double s_in, double dilution,
              double a_max, std::size_t n_age);

  const GrowthLaw& mu() const { return mu_; }
  const AgeFunction& beta() const { return beta_; }
  const AgeFunction& k() const { return k_; }
  const AgeFunction& q() const { return q_; }
  double s_in() const { return s_in_; }
  double dilution() const { return dilution_; }
  double a_max() const { return a_max_; }
  std::size_t n_age() const { return n_age_; }
  double age_step() const { return a_max_ / static_cast<double>(n_age_ - 1); }

  /// L = inf_a beta(a).
  double min_mortality() const { return min_mortality_; }
  /// L_mu = max{mu'(S) : S in [0, S_in]}.
  double growth_lipschitz() const { return growth_lipschitz_; }

  AgeGrid grid(QuadratureRule rule = QuadratureRule::kTrapezoid) const {
    return AgeGrid(a_max_, n_age_, rule);
  }

  /// Same model on a grid with the given step (a_max rounded up to a whole
  /// number of steps).
  ModelParams with_step(double step) const;
  ModelParams with_grid(double a_max, std::size_t n_age) const;

  /// Truncation satisfying (D + L) a_max >= 40.
  static double default_a_max(double dilution, double min_mortality);

 private:
  GrowthLaw mu_;
  AgeFunction beta_;
  AgeFunction k_;
  AgeFunction q_;
  double s_in_;
  double dilution_;
  double a_max_;
  std::size_t n_age_;
  double min_mortality_;
  double growth_lipschitz_;
};

/// Structural decomposition linking k, q, beta and D:
///   q' - beta q - gamma D q - delta theta k = h,
///   k' - beta k - (alpha / theta) q - b D k = p,
/// with h, p >= 0, plus the ratio bound k <= R q.
struct AssumptionBData {
  double b = 0.0;
  double gamma = 0.0;
  double theta = 1.0;
  double alpha = 0.0;
  double delta = 0.0;
  AgeFunction h = AgeFunction::MakeConstant(0.0);
  AgeFunction p = AgeFunction::MakeConstant(0.0);
  double ratio_bound = 1.0;  // R
};

struct CheckItem {
  std::string name;
  bool passed = false;
  double witness = 0.0;  // offending (or extreme) value
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckItem> items;

  bool all_passed() const;
  const CheckItem* find(const std::string& name) const;
};

/// Checks the standing assumptions: positivity and monotonicity of mu,
/// non-negativity and boundedness of beta, k, q, and positive integrals of k
/// and q. Failures are reported, not thrown.
ValidationReport validate_model(const ModelParams& params);

struct RatioBoundReport {
  bool holds = false;
  bool no_finite_bound = false;  // q vanishes where k > 0
  double worst_ratio = 0.0;      // max k/q found
  double worst_age = 0.0;        // argmax; +inf when the tail decides
  std::string message;
};

/// k(a) <= R q(a) on the age grid and, for closed-form families, on the
/// analytic tail beyond it.
RatioBoundReport verify_assumption_A(const ModelParams& params, double ratio_bound);

struct ResidualReport {
  bool passed = false;
  double max_h_mismatch = 0.0;  // max |stated h - computed h|
  double max_p_mismatch = 0.0;
  double min_h = 0.0;           // min computed h
  double min_p = 0.0;
  double h_worst_age = 0.0;
  double p_worst_age = 0.0;
  bool b_at_most_one = true;
  bool gamma_at_most_one = true;
  std::vector<std::string> failures;
};

/// Evaluates both residual identities of the decomposition on the age grid.
ResidualReport verify_assumption_B(const ModelParams& params, const AssumptionBData& data,
                                   double tol = 1e-9);

}  // namespace agechem

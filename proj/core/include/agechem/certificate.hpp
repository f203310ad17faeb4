#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "agechem/equilibrium.hpp"
#include "agechem/linalg3.hpp"
#include "agechem/model.hpp"

namespace agechem {

/// Auxiliary constants of the sufficient stability conditions.
struct CertificateConstants {
  double sigma = 0.0;
  double epsilon = 1.0;
  double omega = 1.0;
  double lambda = 0.0;
  double R1 = 1.0;
  double R2 = 1.0;
  double R3 = 1.0;
  double B = 1.0;
  double Gamma = 1.0;
  double M = 1.0;
  double F = 0.0;  // mass bound of the trapping region, > R S_in
};

/// ||rho^{-1} h||_2, ||rho^{-1}(theta p - h)||_2 and ||rho r||_2 with
/// rho(a) = exp(-sigma a).
struct WeightedNorms {
  double rho_inv_h = 0.0;
  double rho_inv_theta_p_minus_h = 0.0;
  double rho_r = 0.0;
  bool closed_form = false;
};

/// ||rho^{-1} sum_i c_i f_i||_2 over [0, inf). Closed form when every f_i is
/// constant or exponential; otherwise Gregory quadrature on the model grid
/// with a tail check. Throws DomainError("increase sigma infeasible for this
/// h") when the integrand does not decay.
double weighted_inverse_norm(const std::vector<std::pair<double, AgeFunction>>& terms, double sigma,
                             const ModelParams& params);

WeightedNorms weighted_norms(const ModelParams& params, const Equilibrium& eq, const AssumptionBData& data,
                             double sigma);

enum class PdStatus { kPass, kMarginal, kFail };
const char* to_string(PdStatus s);

struct ConditionReport {
  // Signed margins (lhs - rhs); the first two are non-strict.
  double margin_3_20 = 0.0;
  double margin_3_21 = 0.0;
  double margin_3_22 = 0.0;  // equals c
  double margin_3_23 = 0.0;
  double lambda_min = 0.0;
  bool holds_3_20 = false;
  bool holds_3_21 = false;
  bool holds_3_22 = false;
  bool holds_3_23 = false;
  PdStatus pd = PdStatus::kFail;
  bool sylvester_pd = false;
  bool overall = false;
  // Smallest margin after normalizing each by the size of its two sides;
  // positive iff overall.
  double normalized_margin = 0.0;
};

struct Certificate {
  CertificateConstants constants;
  double ratio_bound = 1.0;
  double s_lower = 0.0;  // from F
  double g_lower = 0.0;  // g(S_lower)
  double g_upper = 0.0;  // g(S_in)
  WeightedNorms norms;
  Mat3 P{};
  double A = 0.0;
  double G1 = 0.0, G2 = 0.0, G3 = 0.0, G4 = 0.0;
  double c = 0.0;
  double k0 = 0.0;
  ConditionReport report;
};

/// The 3x3 matrix of the positive-definiteness condition and its (0,0)
/// entry A.
std::pair<Mat3, double> assemble_P(const ModelParams& params, const Equilibrium& eq, const AssumptionBData& data,
                                   const CertificateConstants& k, const WeightedNorms& norms);

/// Evaluates all five conditions and the derived constants. Throws
/// InputError for constants out of range.
Certificate check_conditions(const ModelParams& params, const Equilibrium& eq, const AssumptionBData& data,
                             const CertificateConstants& constants);

/// Threshold helpers for the Toth-Kot model:
///   beta = L, q = 1, k = Y exp(-k_tilde a).
namespace tothkot {

/// D > k^2 / (8 (2L + k)).
double threshold_4_9(double L, double k_tilde);
/// D >= (k - L)^2 / (8 k) from the linearization; +inf when k = 0 < L.
double threshold_4_10(double L, double k_tilde);
/// Roots of Delta; Gamma1 <= Gamma2.
std::pair<double, double> gamma_roots(double D, double L, double k_tilde);
/// (L+D)^2 G^2 - 2 (L+D)(2(L+D) + k) G + k^2.
double delta_quadratic(double Gamma, double D, double L, double k_tilde);
/// 4D/(L+D) - Gamma1; positive iff the recipe is feasible.
double g_tilde(double D, double L, double k_tilde);
/// (L+D)(-D^2 M^2 + D Gamma (4D + 2L - Gamma (L+D) + k) M - Gamma^2 L (L+k)).
double J(double M, double Gamma, double D, double L, double k_tilde);
/// Maximizer of J in M.
double M_star(double Gamma, double D, double L, double k_tilde);
/// P with B = 0.
Mat3 P0(double Gamma, double M, double D, double L, double k_tilde);

AssumptionBData decomposition(double Y, double D, double L, double k_tilde);

struct Recipe {
  bool feasible = false;
  double gamma1 = 0.0;
  double gamma_upper = 0.0;  // 4D/(L+D)
  std::optional<Certificate> certificate;
  std::string message;
};

/// Closed-form certificate selection: midpoint Gamma, maximizing M,
/// sigma = (D+L)/2, epsilon at twice its bound, B at half its bound,
/// F = 2 Y S_in. Infeasible iff Gamma1 >= 4D/(L+D).
Recipe recipe(const ModelParams& params, const Equilibrium& eq, double Y, double k_tilde);

struct ScanRow {
  double D = 0.0;
  bool recipe_feasible = false;
  bool cond_4_9 = false;
  bool cond_4_10 = false;
};

/// Recipe feasibility and both threshold predicates on a D grid.
std::vector<ScanRow> feasibility_scan(double L, double k_tilde, const std::vector<double>& d_grid);

/// Bisects the recipe feasibility flip between d_lo (infeasible) and d_hi
/// (feasible).
double bisect_flip(double L, double k_tilde, double d_lo, double d_hi, double rel_tol = 1e-12);

}  // namespace tothkot

struct SearchOptions {
  std::int64_t budget = 2000;  // condition evaluations
  std::uint64_t seed = 1;
  std::optional<double> F;     // fixed mass bound; searched when unset
};

struct SearchResult {
  bool found = false;
  std::int64_t evaluations = 0;
  std::optional<Certificate> best;  // feasible point, or best margins
  std::string message;
};

/// Random log-uniform exploration followed by a coordinate pattern search
/// maximizing the normalized margin. Deterministic for fixed options.
SearchResult search_certificate(const ModelParams& params, const Equilibrium& eq, const AssumptionBData& data,
                                const SearchOptions& options);

}  // namespace agechem

#pragma once

#include <array>
#include <vector>

#include "agechem/certificate.hpp"
#include "agechem/equilibrium.hpp"
#include "agechem/model.hpp"
#include "agechem/simulator.hpp"

namespace agechem {

struct LyapunovWeights {
  double sigma = 0.0;
  double B = 1.0;
  double Gamma = 1.0;
  double M = 1.0;

  static LyapunovWeights FromCertificate(const CertificateConstants& k) { return {k.sigma, k.B, k.Gamma, k.M}; }
};

struct NormalizedVars {
  double zeta = 1.0;  // <q,f> / <q,f*>
  double xi = 1.0;    // <k,f> / <k,f*>
  std::vector<double> v;
  std::vector<double> chi;
  double phi = 0.0;
  double w = 0.0;
  double g = 1.0;
  double x = 0.0;  // mu(S) <k,f>
};

struct LyapunovValues {
  double V = 0.0;
  // Summands of V.
  double V_phi = 0.0;
  double V_w = 0.0;
  double Q = 0.0;
  double V_chi = 0.0;
  double rho_chi_sq = 0.0;
  double Psi = 0.0;
  double E = 0.0;
};

/// U split into its thirteen summands, in the order they are written.
struct UBreakdown {
  std::array<double, 13> terms{};
  double total() const;
};

/// Evaluates the normalized variables and the Lyapunov quantities against a
/// fixed equilibrium. Inner products use the grid and rule of the
/// equilibrium; tails beyond a_max are dropped.
class LyapunovEvaluator {
 public:
  LyapunovEvaluator(ModelParams params, Equilibrium eq, LyapunovWeights weights);

  const ModelParams& params() const { return params_; }
  const Equilibrium& equilibrium() const { return eq_; }
  const LyapunovWeights& weights() const { return weights_; }

  /// Throws DomainError("state outside X") if <q,f> or <k,f> is not positive.
  NormalizedVars normalized_vars(const State& state) const;
  /// Integral of M (g - 1) / ((S_in - s) g) from S* to S by adaptive
  /// Simpson, absolute tolerance 1e-10. Rejects S outside
  /// [1e-6 S_in, (1 - 1e-6) S_in].
  double Q_of_S(double s) const;
  /// V with its summands, the measure Psi and the diagnostic E.
  LyapunovValues evaluate(const State& state) const;
  double lyapunov_V(const State& state) const { return evaluate(state).V; }
  double measure_Psi(const State& state) const { return evaluate(state).Psi; }
  double E(const State& state) const { return evaluate(state).E; }
  /// Exact time derivative of V along solutions.
  UBreakdown derivative_U(const State& state, const AssumptionBData& data) const;

 private:
  double dot(const std::vector<double>& a, const std::vector<double>& b) const;

  ModelParams params_;
  Equilibrium eq_;
  LyapunovWeights weights_;
  std::vector<double> w_;     // quadrature weights
  std::vector<double> k_;     // sampled k
  std::vector<double> q_;     // sampled q
  std::vector<double> beta_;  // sampled beta
  std::vector<double> rho2_;  // exp(-2 sigma a)
  std::vector<double> f_star_;
};

/// (S, f) in the trapping region: R S + ||f||_1 <= F and S >= S_lower.
bool in_trapping_region(const LyapunovEvaluator& ev, const State& state, double F, double ratio_bound);

struct DecayReport {
  Vec3 z{};
  double U = 0.0;
  double zPz = 0.0;
  double c_term = 0.0;  // B c ||rho chi||^2
  double slack = 0.0;   // U + zPz + c_term, must be <= tol
  double unscaled_slack = 0.0;  // U + zPz + c ||rho chi||^2
  double tol = 0.0;             // 1e-8 (1 + |U|)
  bool passed = false;
  double k0 = 0.0;
};

/// Evaluates U + z^T P z + B c ||rho chi||^2 <= 0. The dissipation of the
/// chi term carries the weight B of that term in V, so c enters scaled by B.
/// The evaluator's weights must be those of the certificate. Throws
/// DomainError("decay inequality not asserted outside trapping region").
DecayReport decay_check(const LyapunovEvaluator& ev, const State& state, const AssumptionBData& data,
                        const Certificate& cert);

}  // namespace agechem

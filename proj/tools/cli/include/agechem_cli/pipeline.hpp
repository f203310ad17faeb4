#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "agechem/certificate.hpp"
#include "agechem/equilibrium.hpp"
#include "agechem/functions.hpp"
#include "agechem/model.hpp"
#include "agechem/simulator.hpp"
#include "agechem_cli/io.hpp"

namespace agechem::cli {

/// f0 = 1.5 f*(0) r, S0 = S*. The boundary value is projected by the
/// simulator's compatibility rule.
State standard_perturbed_run(const Equilibrium& eq, const ModelParams& params,
                             std::vector<std::string>* warnings = nullptr);
/// 30 / D.
double standard_horizon(const ModelParams& params);

/// Lyapunov decay observed along a simulation sampled every `stride` steps.
struct DecaySummary {
  double V0 = 0.0;
  double V_end = 0.0;
  double horizon = 0.0;
  bool monotone = true;
  double max_increase = 0.0;              // largest V(t_{i+1}) - V(t_i)
  std::optional<double> below_1e6_time;   // first time V <= 1e-6 V0
  std::size_t samples = 0;
  std::size_t outside_omega = 0;          // samples where the inequality is not asserted
  double worst_slack = -std::numeric_limits<double>::infinity();  // max of slack - tol
  bool decay_passed = true;
};

/// Runs the simulator from `initial` and checks monotonicity of V and the
/// decay inequality of `cert` at every sample. `eq` should be the
/// scheme-consistent equilibrium of `params`.
DecaySummary decay_run(const ModelParams& params, const Equilibrium& eq, const Certificate& cert,
                       const AssumptionBData& data, const State& initial, double horizon, std::size_t stride);

struct TothKotInputs {
  double Y = 2.0;
  double k_tilde = 2.0;
  double L = 1.0;
  double D = 0.2;
  double s_in = 2.0;
  GrowthLaw mu = GrowthLaw::Linear(1.0);
  std::size_t n_age = 4001;
  std::optional<double> horizon;  // defaults to 30 / D
  std::size_t stride = 10;
};

ModelParams tothkot_model(const TothKotInputs& in);

struct TothKotReport {
  TothKotInputs inputs;
  Equilibrium equilibrium;  // accurate scheme
  double threshold_4_9 = 0.0;
  double threshold_4_10 = 0.0;
  tothkot::Recipe recipe;
  std::optional<DecaySummary> decay;  // only when the recipe is feasible
};

/// Equilibrium, thresholds and recipe certificate, plus the decay summary of
/// the standard perturbed run when the certificate holds. The run uses the
/// scheme-consistent equilibrium and its own recipe certificate.
TothKotReport tothkot_report(const TothKotInputs& in);

Json to_json(const DecaySummary& d);
Json to_json(const TothKotReport& r);

}  // namespace agechem::cli

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "agechem/functions.hpp"
#include "agechem/model.hpp"

namespace agechem {

/// Sampled age profile plus substrate at time t.
struct State {
  std::vector<double> f;
  double s = 0.0;
  double t = 0.0;
};

/// Scalars recorded after every step.
struct StepRecord {
  double t = 0.0;
  double s = 0.0;
  double mass = 0.0;  // ||f||_1
  double kf = 0.0;    // <k, f>
  double qf = 0.0;    // <q, f>
  double x = 0.0;     // mu(S) <k, f>, the newborn flux
  double bf = 0.0;    // <beta, f>
};

struct Trajectory {
  double dt = 0.0;
  std::size_t stride = 1;
  std::vector<StepRecord> records;  // one per step, starting at t = 0
  std::vector<State> snapshots;     // every `stride` steps, starting at t = 0
  std::vector<std::string> warnings;
};

struct SimulationOptions {
  double horizon = 0.0;
  std::size_t stride = 1;
  bool keep_snapshots = false;
  // Relative size of f(a_max) that triggers the truncation warning.
  double tail_warning = 1e-10;
};

/// Called after every step (and once for the initial state).
using StepObserver = std::function<void(const State&, const StepRecord&)>;

/// Characteristics-aligned scheme for the transport PDE with renewal
/// boundary and substrate ODE. The time step equals the age step.
class Simulator {
 public:
  explicit Simulator(ModelParams params);

  const ModelParams& params() const { return params_; }
  double dt() const { return step_; }

  /// Samples `profile` on the grid. If f(0) misses mu(S0) <k, f> by more
  /// than 1e-8 relative, the boundary value is replaced by the compatible
  /// one and a warning is appended.
  State make_initial(double s0, const AgeFunction& profile, std::vector<std::string>* warnings = nullptr) const;
  State make_initial(double s0, std::vector<double> samples, std::vector<std::string>* warnings = nullptr) const;

  /// Advances the state by one step in place. Returns f(a_max) / max f.
  double step(State& state) const;

  StepRecord record(const State& state) const;

  Trajectory simulate(State initial, const SimulationOptions& options, const StepObserver& observer = {}) const;

  /// Compatible boundary value mu(S) <k, f> solved for f(0).
  double boundary_value(double s, const std::vector<double>& f) const;

 private:
  ModelParams params_;
  double step_;
  std::vector<double> decay_;
  std::vector<double> wk_;
  std::vector<double> wq_;
  std::vector<double> wb_;
  std::vector<double> w_;
};

/// Newborn flux x(t) sampled at uniform times j * dt.
struct BoundaryHistory {
  double dt = 0.0;
  std::vector<double> x;

  double t_end() const { return dt * static_cast<double>(x.empty() ? 0 : x.size() - 1); }
  /// Linear interpolation; throws InputError outside [0, t_end].
  double at(double t) const;
  static BoundaryHistory FromTrajectory(const Trajectory& trajectory);
};

/// Explicit solution along characteristics:
///   f0(a - t) exp(-D t - int_{a-t}^a beta)  for a >= t,
///   x(t - a) exp(-D a - int_0^a beta)       for a < t.
double oracle_profile(double t, double a, const BoundaryHistory& history, const AgeFunction& f0,
                      const ModelParams& params);

struct PathwiseBoundsInput {
  double ratio_bound = 1.0;  // R of k <= R q
  double tol = 0.0;          // 0 selects 1e-6 + 10 * age step
  // Moment lower bounds need the decomposition exponents b, gamma.
  std::optional<double> b;
  std::optional<double> gamma;
};

struct BoundCheck {
  std::string name;
  bool passed = true;
  double worst_slack = 0.0;  // min over time of (bound side - value side); < -tol fails
  double worst_time = 0.0;
};

struct PathwiseReport {
  std::vector<BoundCheck> checks;
  bool all_passed() const;
  const BoundCheck* find(const std::string& name) const;
};

/// Substrate upper and lower bounds, the RS + ||f||_1 envelope and, when
/// exponents are given, the exponential lower bounds on <k,f> and <q,f>.
PathwiseReport check_pathwise_bounds(const Trajectory& trajectory, const ModelParams& params,
                                     const PathwiseBoundsInput& input);

struct TrappingStatus {
  double F = 0.0;
  double s_lower = 0.0;
  std::optional<double> entered_at;
  double t_bound = 0.0;
  bool within_bound = false;  // entered_at <= t_bound + stride * dt
};

/// S_lower = D S_in / (2 (D + L_mu F ||q||_inf)).
double trapping_s_lower(const ModelParams& params, double F);
/// T(s) = ln(1 + (s - F)^+ / (F - R S_in)) / D + ln 2 / (D + L_mu F ||q||_inf).
double trapping_time_bound(const ModelParams& params, double F, double ratio_bound, double s);

/// First recorded time with R S + ||f||_1 <= F and S >= S_lower. Throws
/// DomainError("inconclusive: extend horizon") when the region was not
/// reached and the horizon is shorter than the predicted bound.
TrappingStatus trapping_report(const Trajectory& trajectory, const ModelParams& params, double F,
                               double ratio_bound);

}  // namespace agechem

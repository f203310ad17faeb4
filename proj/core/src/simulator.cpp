#include "agechem/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "agechem/equilibrium.hpp"
#include "agechem/errors.hpp"

namespace agechem {

namespace {

constexpr double kCompatibilityTol = 1e-8;

double Dot(const std::vector<double>& w, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
  return s;
}

}  // namespace

Simulator::Simulator(ModelParams params) : params_(std::move(params)), step_(params_.age_step()) {
  const AgeGrid grid = params_.grid();
  decay_ = decay_factors(params_);
  w_ = grid.weights();
  wk_.resize(grid.size());
  wq_.resize(grid.size());
  wb_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double a = grid.age(i);
    wk_[i] = w_[i] * params_.k().value(a);
    wq_[i] = w_[i] * params_.q().value(a);
    wb_[i] = w_[i] * params_.beta().value(a);
  }
}

double Simulator::boundary_value(double s, const std::vector<double>& f) const {
  double kp = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) kp += wk_[i] * f[i];
  const double mu = params_.mu().value(s);
  const double denom = 1.0 - mu * wk_[0];
  if (!(denom > 0.0)) throw DomainError("grid too coarse for boundary closure");
  return mu * kp / denom;
}

State Simulator::make_initial(double s0, const AgeFunction& profile, std::vector<std::string>* warnings) const {
  return make_initial(s0, params_.grid().sample(profile), warnings);
}

State Simulator::make_initial(double s0, std::vector<double> samples, std::vector<std::string>* warnings) const {
  if (!(s0 > 0.0 && s0 < params_.s_in())) throw InputError("initial substrate must lie in (0, S_in)");
  if (samples.size() != params_.n_age()) throw InputError("initial profile does not match the age grid");
  for (double v : samples) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("initial profile must be finite and non-negative");
  }
  State state{std::move(samples), s0, 0.0};
  const double compatible = boundary_value(s0, state.f);
  const double given = state.f[0];
  if (std::abs(given - compatible) > kCompatibilityTol * std::max(std::abs(compatible), 1e-300)) {
    state.f[0] = compatible;
    if (warnings != nullptr) {
      std::ostringstream os;
      os << "initial boundary value projected from " << given << " to mu(S0)<k,f0> = " << compatible;
      warnings->push_back(os.str());
    }
  }
  return state;
}

double Simulator::step(State& state) const {
  std::vector<double>& f = state.f;
  const std::size_t n = f.size();
  const GrowthLaw& mu = params_.mu();
  const double d = params_.dilution();
  const double s_in = params_.s_in();
  const double h = step_;

  // Transport along characteristics; old and new moments in the same pass.
  double q_old = 0.0;
  double k_part = 0.0;
  double q_part = 0.0;
  double f_max = 0.0;
  for (std::size_t i = n - 1; i >= 1; --i) {
    q_old += wq_[i] * f[i];
    f[i] = f[i - 1] * decay_[i - 1];
    k_part += wk_[i] * f[i];
    q_part += wq_[i] * f[i];
    f_max = std::max(f_max, f[i]);
  }
  q_old += wq_[0] * f[0];

  auto closure = [&](double mu_value) {
    const double denom = 1.0 - mu_value * wk_[0];
    if (!(denom > 0.0)) throw DomainError("grid too coarse for boundary closure");
    return mu_value * k_part / denom;
  };

  // Predicted <q, f> at t + h from the boundary with the old substrate.
  const double q_new = q_part + wq_[0] * closure(mu.value(state.s));
  const double q_mid = 0.5 * (q_old + q_new);
  auto rhs = [&](double s, double q) { return d * (s_in - s) - mu.value(s) * q; };
  const double s = state.s;
  const double k1 = rhs(s, q_old);
  const double k2 = rhs(s + 0.5 * h * k1, q_mid);
  const double k3 = rhs(s + 0.5 * h * k2, q_mid);
  const double k4 = rhs(s + h * k3, q_new);
  const double s_new = s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!(s_new > 0.0 && s_new < s_in)) {
    std::ostringstream os;
    os << "scheme instability: reduce dt (S left (0, S_in) at t=" << state.t + h << ", S=" << s_new << ")";
    throw DomainError(os.str());
  }

  f[0] = closure(mu.value(s_new));
  f_max = std::max(f_max, f[0]);
  state.s = s_new;
  state.t += h;
  return f_max > 0.0 ? f[n - 1] / f_max : 0.0;
}

StepRecord Simulator::record(const State& state) const {
  StepRecord r;
  r.t = state.t;
  r.s = state.s;
  r.mass = Dot(w_, state.f);
  r.kf = Dot(wk_, state.f);
  r.qf = Dot(wq_, state.f);
  r.bf = Dot(wb_, state.f);
  r.x = params_.mu().value(state.s) * r.kf;
  return r;
}

Trajectory Simulator::simulate(State initial, const SimulationOptions& options, const StepObserver& observer) const {
  if (!(options.horizon >= 0.0)) throw InputError("horizon must be non-negative");
  if (options.stride == 0) throw InputError("stride must be positive");
  Trajectory traj;
  traj.dt = step_;
  traj.stride = options.stride;
  const auto steps = static_cast<std::size_t>(std::ceil(options.horizon / step_ - 1e-9));
  traj.records.reserve(steps + 1);

  State state = std::move(initial);
  auto emit = [&](std::size_t j) {
    const StepRecord rec = record(state);
    traj.records.push_back(rec);
    if (options.keep_snapshots && j % options.stride == 0) traj.snapshots.push_back(state);
    if (observer) observer(state, rec);
  };
  emit(0);
  bool warned = false;
  for (std::size_t j = 1; j <= steps; ++j) {
    const double tail = step(state);
    if (!warned && tail > options.tail_warning) {
      std::ostringstream os;
      os << "f(a_max)/max f = " << tail << " at t=" << state.t << ": mass beyond a_max is neglected";
      traj.warnings.push_back(os.str());
      warned = true;
    }
    emit(j);
  }
  return traj;
}

double BoundaryHistory::at(double t) const {
  const double slack = 1e-9 * dt;
  if (x.empty() || t < -slack || t > t_end() + slack) {
    std::ostringstream os;
    os << "requested time " << t << " outside recorded history [0, " << t_end() << "]";
    throw InputError(os.str());
  }
  if (x.size() == 1) return x[0];
  const double u = std::clamp(t / dt, 0.0, static_cast<double>(x.size() - 1));
  const auto j = std::min(static_cast<std::size_t>(u), x.size() - 2);
  const double w = u - static_cast<double>(j);
  return (1.0 - w) * x[j] + w * x[j + 1];
}

BoundaryHistory BoundaryHistory::FromTrajectory(const Trajectory& trajectory) {
  BoundaryHistory h;
  h.dt = trajectory.dt;
  h.x.reserve(trajectory.records.size());
  for (const auto& r : trajectory.records) h.x.push_back(r.x);
  return h;
}

double oracle_profile(double t, double a, const BoundaryHistory& history, const AgeFunction& f0,
                      const ModelParams& params) {
  if (t < 0.0 || a < 0.0) throw InputError("oracle_profile needs t, a >= 0");
  const double d = params.dilution();
  if (a >= t) return f0.value(a - t) * std::exp(-d * t - params.beta().integral(a - t, a));
  return history.at(t - a) * std::exp(-d * a - params.beta().integral(0.0, a));
}

bool PathwiseReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.passed; });
}

const BoundCheck* PathwiseReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

PathwiseReport check_pathwise_bounds(const Trajectory& trajectory, const ModelParams& params,
                                     const PathwiseBoundsInput& input) {
  if (trajectory.records.empty()) throw InputError("empty trajectory");
  const double tol = input.tol > 0.0 ? input.tol : 1e-6 + 10.0 * params.age_step();
  const double d = params.dilution();
  const double s_in = params.s_in();
  const double r = input.ratio_bound;
  const StepRecord& first = trajectory.records.front();
  const double y0 = r * first.s + first.mass;
  const double l_mu = params.growth_lipschitz();
  const double q_sup = params.q().sup_norm();
  const double s_floor =
      std::min(first.s, d * s_in / (d + l_mu * q_sup * (r * s_in + std::max(0.0, y0 - r * s_in))));

  PathwiseReport report;
  BoundCheck upper{"substrate upper"};
  BoundCheck lower{"substrate lower"};
  BoundCheck envelope{"mass envelope"};
  BoundCheck birth{"birth moment lower"};
  BoundCheck consumption{"consumption moment lower"};
  auto update = [](BoundCheck& c, double slack, double t) {
    if (slack < c.worst_slack) {
      c.worst_slack = slack;
      c.worst_time = t;
    }
  };
  for (const auto& rec : trajectory.records) {
    const double e = std::exp(-d * rec.t);
    update(upper, s_in - (s_in - first.s) * e - rec.s, rec.t);
    update(lower, rec.s - s_floor, rec.t);
    update(envelope, r * s_in + (y0 - r * s_in) * e - (r * rec.s + rec.mass), rec.t);
    if (input.b) update(birth, rec.kf / first.kf - std::exp(d * (*input.b - 1.0) * rec.t), rec.t);
    if (input.gamma) update(consumption, rec.qf / first.qf - std::exp(d * (*input.gamma - 1.0) * rec.t), rec.t);
  }
  for (BoundCheck* c : {&upper, &lower, &envelope}) {
    c->passed = c->worst_slack >= -tol;
    report.checks.push_back(*c);
  }
  if (input.b) {
    birth.passed = birth.worst_slack >= -tol;
    report.checks.push_back(birth);
  }
  if (input.gamma) {
    consumption.passed = consumption.worst_slack >= -tol;
    report.checks.push_back(consumption);
  }
  return report;
}

double trapping_s_lower(const ModelParams& params, double F) {
  const double d = params.dilution();
  return d * params.s_in() / (2.0 * (d + params.growth_lipschitz() * F * params.q().sup_norm()));
}

double trapping_time_bound(const ModelParams& params, double F, double ratio_bound, double s) {
  const double d = params.dilution();
  const double margin = F - ratio_bound * params.s_in();
  if (!(margin > 0.0)) throw InputError("F must exceed R * S_in");
  return std::log1p(std::max(0.0, s - F) / margin) / d +
         std::log(2.0) / (d + params.growth_lipschitz() * F * params.q().sup_norm());
}

TrappingStatus trapping_report(const Trajectory& trajectory, const ModelParams& params, double F,
                               double ratio_bound) {
  if (trajectory.records.empty()) throw InputError("empty trajectory");
  TrappingStatus st;
  st.F = F;
  st.s_lower = trapping_s_lower(params, F);
  const StepRecord& first = trajectory.records.front();
  st.t_bound = trapping_time_bound(params, F, ratio_bound, ratio_bound * first.s + first.mass);
  for (const auto& rec : trajectory.records) {
    if (ratio_bound * rec.s + rec.mass <= F && rec.s >= st.s_lower) {
      st.entered_at = rec.t;
      break;
    }
  }
  if (!st.entered_at) {
    if (trajectory.records.back().t < st.t_bound) {
      std::ostringstream os;
      os << "inconclusive: extend horizon (trapping bound T = " << st.t_bound << ")";
      throw DomainError(os.str());
    }
    st.within_bound = false;
    return st;
  }
  st.within_bound = *st.entered_at <= st.t_bound + static_cast<double>(trajectory.stride) * trajectory.dt;
  return st;
}

}  // namespace agechem

#include "agechem_cli/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "agechem/errors.hpp"
#include "agechem/lyapunov.hpp"

namespace agechem::cli {

namespace {

// V is compared between samples with a round-off allowance relative to V(0).
constexpr double kMonotoneTol = 1e-12;

}  // namespace

State standard_perturbed_run(const Equilibrium& eq, const ModelParams& params, std::vector<std::string>* warnings) {
  std::vector<double> f0(eq.r.size());
  for (std::size_t i = 0; i < f0.size(); ++i) f0[i] = 1.5 * eq.f_star0 * eq.r[i];
  return Simulator(params).make_initial(eq.s_star, std::move(f0), warnings);
}

double standard_horizon(const ModelParams& params) { return 30.0 / params.dilution(); }

DecaySummary decay_run(const ModelParams& params, const Equilibrium& eq, const Certificate& cert,
                       const AssumptionBData& data, const State& initial, double horizon, std::size_t stride) {
  if (stride == 0) throw InputError("stride must be positive");
  const LyapunovEvaluator ev(params, eq, LyapunovWeights::FromCertificate(cert.constants));
  DecaySummary out;
  out.horizon = horizon;
  double prev = 0.0;
  std::size_t step = 0;
  auto observe = [&](const State& state, const StepRecord&) {
    if (step++ % stride != 0) return;
    const double v = ev.lyapunov_V(state);
    if (out.samples == 0) {
      out.V0 = v;
    } else {
      out.max_increase = std::max(out.max_increase, v - prev);
      if (v > prev + kMonotoneTol * out.V0) out.monotone = false;
    }
    if (!out.below_1e6_time && v <= 1e-6 * out.V0) out.below_1e6_time = state.t;
    prev = v;
    out.V_end = v;
    ++out.samples;
    if (!in_trapping_region(ev, state, cert.constants.F, cert.ratio_bound)) {
      ++out.outside_omega;
      return;
    }
    const DecayReport rep = decay_check(ev, state, data, cert);
    out.worst_slack = std::max(out.worst_slack, rep.slack - rep.tol);
    if (!rep.passed) out.decay_passed = false;
  };
  SimulationOptions opts;
  opts.horizon = horizon;
  Simulator(params).simulate(initial, opts, observe);
  return out;
}

ModelParams tothkot_model(const TothKotInputs& in) {
  return ModelParams(in.mu, AgeFunction::MakeConstant(in.L), AgeFunction::MakeExpDecay(in.Y, in.k_tilde),
                     AgeFunction::MakeConstant(1.0), in.s_in, in.D, ModelParams::default_a_max(in.D, in.L),
                     in.n_age);
}

TothKotReport tothkot_report(const TothKotInputs& in) {
  const ModelParams params = tothkot_model(in);
  TothKotReport rep;
  rep.inputs = in;
  rep.equilibrium = solve_equilibrium(params, EquilibriumScheme::kAccurate);
  rep.threshold_4_9 = tothkot::threshold_4_9(in.L, in.k_tilde);
  rep.threshold_4_10 = tothkot::threshold_4_10(in.L, in.k_tilde);
  rep.recipe = tothkot::recipe(params, rep.equilibrium, in.Y, in.k_tilde);
  if (!rep.recipe.certificate || !rep.recipe.certificate->report.overall) return rep;

  const Equilibrium eq = solve_equilibrium(params, EquilibriumScheme::kSchemeConsistent);
  const tothkot::Recipe run_recipe = tothkot::recipe(params, eq, in.Y, in.k_tilde);
  if (!run_recipe.certificate || !run_recipe.certificate->report.overall) {
    throw DomainError("recipe certificate fails on the simulation grid: " + run_recipe.message);
  }
  const AssumptionBData data = tothkot::decomposition(in.Y, in.D, in.L, in.k_tilde);
  const State initial = standard_perturbed_run(eq, params);
  rep.decay = decay_run(params, eq, *run_recipe.certificate, data, initial,
                        in.horizon.value_or(standard_horizon(params)), in.stride);
  return rep;
}

Json to_json(const DecaySummary& d) {
  return {{"V0", d.V0},
          {"V_end", d.V_end},
          {"horizon", d.horizon},
          {"monotone", d.monotone},
          {"max_increase", d.max_increase},
          {"below_1e-6_time", d.below_1e6_time ? Json(*d.below_1e6_time) : Json()},
          {"samples", d.samples},
          {"outside_omega", d.outside_omega},
          {"worst_slack", number(d.worst_slack)},
          {"decay_passed", d.decay_passed}};
}

Json to_json(const TothKotReport& r) {
  const TothKotInputs& in = r.inputs;
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "tothkot";
  j["inputs"] = {{"Y", in.Y},         {"k_tilde", in.k_tilde}, {"L", in.L},
                 {"D", in.D},         {"S_in", in.s_in},       {"mu", to_json(in.mu)},
                 {"n_age", in.n_age}, {"stride", in.stride}};
  j["S_star"] = r.equilibrium.s_star;
  j["f_star0"] = r.equilibrium.f_star0;
  j["thresholds"] = {{"threshold_4_9", number(r.threshold_4_9)}, {"threshold_4_10", number(r.threshold_4_10)}};
  Json cert = {{"feasible", r.recipe.feasible},
               {"gamma1", number(r.recipe.gamma1)},
               {"gamma_upper", number(r.recipe.gamma_upper)},
               {"message", r.recipe.message}};
  if (r.recipe.certificate) cert["certificate"] = to_json(*r.recipe.certificate);
  j["certificate"] = cert;
  j["decay"] = r.decay ? to_json(*r.decay) : Json();
  return j;
}

}  // namespace agechem::cli

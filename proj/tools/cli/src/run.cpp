#include "agechem_cli/run.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "agechem/certificate.hpp"
#include "agechem/equilibrium.hpp"
#include "agechem/errors.hpp"
#include "agechem/lyapunov.hpp"
#include "agechem/simulator.hpp"
#include "agechem_cli/io.hpp"
#include "agechem_cli/pipeline.hpp"

namespace agechem::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ModelParams LoadModel(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw InputError("--model is required");
  ModelParams params = parse_model(read_json_file(cfg.model_path));
  const ValidationReport v = validate_model(params);
  if (!v.all_passed()) {
    std::string failed;
    for (const CheckItem& item : v.items) {
      if (!item.passed) failed += (failed.empty() ? "" : ", ") + item.name;
    }
    throw DomainError("model fails standing assumptions: " + failed);
  }
  if (cfg.dt) params = params.with_step(*cfg.dt);
  return params;
}

EquilibriumScheme ParseScheme(const std::string& name, EquilibriumScheme fallback) {
  if (name.empty()) return fallback;
  if (name == "accurate") return EquilibriumScheme::kAccurate;
  if (name == "consistent") return EquilibriumScheme::kSchemeConsistent;
  throw InputError("--scheme must be 'accurate' or 'consistent'");
}

void Emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.out);
  if (!file) throw InputError("cannot write " + cfg.out);
  file << text;
}

std::string Dump(const Json& j) { return j.dump(2) + "\n"; }

Json Header(const std::string& kind) { return {{"schema_version", kSchemaVersion}, {"kind", kind}}; }

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream file(path);
  if (!file) throw InputError("cannot write " + path.string());
  file << text;
}

int CmdEquilibrium(const RunConfig& cfg, std::ostream& out) {
  const ModelParams params = LoadModel(cfg);
  const Equilibrium eq = solve_equilibrium(params, ParseScheme(cfg.scheme, EquilibriumScheme::kAccurate));
  Json j = Header("equilibrium");
  j.update(to_json(eq));
  Emit(cfg, out, Dump(j));
  return kExitOk;
}

int CmdSimulate(const RunConfig& cfg, std::ostream& err) {
  const ModelParams params = LoadModel(cfg);
  const Simulator sim(params);
  std::vector<std::string> warnings;
  State initial;
  if (!cfg.initial_path.empty()) {
    InitialCondition ic = parse_initial(read_json_file(cfg.initial_path));
    if (ic.profile) {
      initial = sim.make_initial(ic.s0, *ic.profile, &warnings);
    } else {
      if (ic.samples.size() != params.n_age()) throw InputError("initial.samples must have n_age entries");
      initial = sim.make_initial(ic.s0, std::move(ic.samples), &warnings);
    }
  } else {
    initial = standard_perturbed_run(solve_equilibrium(params, EquilibriumScheme::kSchemeConsistent), params,
                                     &warnings);
  }
  if (cfg.assert_bounds && cfg.assumption_b_path.empty()) {
    throw InputError("--assert-bounds needs --assumption-b for the ratio bound and exponents");
  }

  SimulationOptions opts;
  opts.horizon = cfg.horizon.value_or(standard_horizon(params));
  opts.stride = cfg.stride.value_or(1);
  opts.keep_snapshots = cfg.snapshots;
  const Trajectory traj = sim.simulate(std::move(initial), opts);
  warnings.insert(warnings.end(), traj.warnings.begin(), traj.warnings.end());
  for (const std::string& w : warnings) err << "warning: " << w << "\n";

  const fs::path dir = cfg.out.empty() ? fs::path(".") : fs::path(cfg.out);
  fs::create_directories(dir);
  {
    std::ofstream file(dir / "trajectory.csv");
    if (!file) throw InputError("cannot write " + (dir / "trajectory.csv").string());
    CsvWriter csv(file, {"t", "S", "mass", "kf", "qf", "x"});
    for (std::size_t i = 0; i < traj.records.size(); i += opts.stride) {
      const StepRecord& r = traj.records[i];
      csv.row({r.t, r.s, r.mass, r.kf, r.qf, r.x});
    }
  }
  if (cfg.snapshots) {
    fs::create_directories(dir / "snapshots");
    std::ostringstream index;
    index << "t,S,file\n";
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
      char name[40];
      std::snprintf(name, sizeof name, "snapshots/snap_%06zu.csv", i);
      std::ostringstream profile;
      write_profile_csv(profile, params, traj.snapshots[i]);
      WriteFile(dir / name, profile.str());
      index << format_double(traj.snapshots[i].t) << "," << format_double(traj.snapshots[i].s) << "," << name
            << "\n";
    }
    WriteFile(dir / "snapshots.csv", index.str());
  }

  if (!cfg.assert_bounds) return kExitOk;
  const AssumptionBData data = parse_assumption_b(read_json_file(cfg.assumption_b_path));
  PathwiseBoundsInput in;
  in.ratio_bound = data.ratio_bound;
  in.b = data.b;
  in.gamma = data.gamma;
  const PathwiseReport rep = check_pathwise_bounds(traj, params, in);
  Json j = Header("pathwise_bounds");
  j["all_passed"] = rep.all_passed();
  j["checks"] = Json::array();
  for (const BoundCheck& c : rep.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"worst_slack", number(c.worst_slack)},
                           {"worst_time", c.worst_time}});
    if (!c.passed) err << "bound violated: " << c.name << " at t = " << c.worst_time << "\n";
  }
  WriteFile(dir / "bounds.json", Dump(j));
  return rep.all_passed() ? kExitOk : kExitDomain;
}

int CmdLyapunov(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.trajectory_path.empty()) throw InputError("--trajectory (snapshot index CSV) is required");
  if (!cfg.certificate_path.empty() && !cfg.weights_path.empty()) {
    throw InputError("give either --weights or --certificate, not both");
  }
  if (!cfg.certificate_path.empty() && cfg.assumption_b_path.empty()) {
    throw InputError("--certificate needs --assumption-b");
  }
  const ModelParams params = LoadModel(cfg);
  const Equilibrium eq = solve_equilibrium(params, ParseScheme(cfg.scheme, EquilibriumScheme::kSchemeConsistent));

  std::optional<AssumptionBData> data;
  if (!cfg.assumption_b_path.empty()) data = parse_assumption_b(read_json_file(cfg.assumption_b_path));
  std::optional<Certificate> cert;
  LyapunovWeights weights;
  if (!cfg.certificate_path.empty()) {
    const Json j = read_json_file(cfg.certificate_path);
    if (!j.contains("certificate") || !j["certificate"].contains("constants")) {
      throw InputError(cfg.certificate_path + ": no certificate.constants object");
    }
    cert = check_conditions(params, eq, *data, parse_constants(j["certificate"]["constants"]));
    if (!cert->report.overall) err << "warning: certificate conditions do not hold for this model\n";
    weights = LyapunovWeights::FromCertificate(cert->constants);
  } else if (!cfg.weights_path.empty()) {
    weights = parse_weights(read_json_file(cfg.weights_path));
  }
  const LyapunovEvaluator ev(params, eq, weights);

  const std::vector<SnapshotEntry> index = read_snapshot_index(cfg.trajectory_path);
  std::vector<LyapunovValues> values;
  std::vector<double> u(index.size(), kNaN);
  std::vector<double> slack(index.size(), kNaN);
  for (std::size_t i = 0; i < index.size(); ++i) {
    const State state{read_profile_csv(index[i].file, params), index[i].s, index[i].t};
    values.push_back(ev.evaluate(state));
    if (data) u[i] = ev.derivative_U(state, *data).total();
    if (cert && in_trapping_region(ev, state, cert->constants.F, cert->ratio_bound)) {
      slack[i] = decay_check(ev, state, *data, *cert).slack;
    }
  }

  std::ostringstream csv_text;
  CsvWriter csv(csv_text, {"t", "V", "Q", "Psi", "E", "U", "U_fd", "slack", "V_phi", "V_w", "V_chi"});
  for (std::size_t i = 0; i < index.size(); ++i) {
    double u_fd = kNaN;
    if (i > 0 && i + 1 < index.size()) {
      u_fd = (values[i + 1].V - values[i - 1].V) / (index[i + 1].t - index[i - 1].t);
    }
    const LyapunovValues& v = values[i];
    csv.row({index[i].t, v.V, v.Q, v.Psi, v.E, u[i], u_fd, slack[i], v.V_phi, v.V_w, v.V_chi});
  }
  Emit(cfg, out, csv_text.str());
  return kExitOk;
}

int CmdCertify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.recipe == cfg.search) throw InputError("certify needs exactly one of --recipe or --search");
  const ModelParams params = LoadModel(cfg);
  const Equilibrium eq = solve_equilibrium(params, EquilibriumScheme::kAccurate);
  Json j = Header("certificate");
  bool holds = false;
  std::string message;
  if (cfg.recipe) {
    const auto* k = std::get_if<AgeFunction::ExpDecay>(&params.k().form());
    const auto* q = std::get_if<AgeFunction::Constant>(&params.q().form());
    if (!k || !q || q->value != 1.0 || !params.beta().is_constant()) {
      throw InputError("--recipe needs beta constant, q = 1 and k = Y exp(-k_tilde a)");
    }
    const tothkot::Recipe r = tothkot::recipe(params, eq, k->amplitude, k->rate);
    j["method"] = "recipe";
    j["gamma1"] = number(r.gamma1);
    j["gamma_upper"] = number(r.gamma_upper);
    if (r.certificate) j["certificate"] = to_json(*r.certificate);
    holds = r.certificate && r.certificate->report.overall;
    message = r.message;
  } else {
    if (cfg.assumption_b_path.empty()) throw InputError("--search needs --assumption-b");
    const AssumptionBData data = parse_assumption_b(read_json_file(cfg.assumption_b_path));
    SearchOptions opts;
    opts.budget = cfg.budget;
    opts.seed = cfg.seed;
    opts.F = cfg.F;
    const SearchResult r = search_certificate(params, eq, data, opts);
    j["method"] = "search";
    j["evaluations"] = r.evaluations;
    j["seed"] = cfg.seed;
    if (r.best) j["certificate"] = to_json(*r.best);
    holds = r.found;
    message = r.message;
  }
  j["found"] = holds;
  j["message"] = message;
  Emit(cfg, out, Dump(j));
  if (!holds) {
    err << "certificate not established: " << message << "\n";
    return kExitDomain;
  }
  return kExitOk;
}

int CmdScan(const RunConfig& cfg, std::ostream& out) {
  const double t9 = tothkot::threshold_4_9(cfg.L, cfg.k_tilde);
  const double lo = cfg.d_min.value_or(0.5 * t9);
  const double hi = cfg.d_max.value_or(2.0 * t9);
  if (!(lo > 0.0 && hi > lo)) throw InputError("scan needs 0 < d_min < d_max");
  if (cfg.points < 2) throw InputError("--points must be at least 2");
  std::vector<double> grid(cfg.points);
  for (std::size_t i = 0; i < cfg.points; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.points - 1);
  }
  std::ostringstream text;
  text << "D,recipe_feasible,cond_4_9,cond_4_10\n";
  for (const tothkot::ScanRow& row : tothkot::feasibility_scan(cfg.L, cfg.k_tilde, grid)) {
    text << format_double(row.D) << "," << row.recipe_feasible << "," << row.cond_4_9 << "," << row.cond_4_10
         << "\n";
  }
  Emit(cfg, out, text.str());
  return kExitOk;
}

int CmdTothKot(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  TothKotInputs in;
  in.Y = cfg.Y;
  in.k_tilde = cfg.k_tilde;
  in.L = cfg.L;
  in.D = cfg.D;
  in.s_in = cfg.s_in;
  in.mu = GrowthLaw::Linear(cfg.mu_rate);
  in.n_age = cfg.n_age;
  in.horizon = cfg.horizon;
  in.stride = cfg.stride.value_or(in.stride);
  const TothKotReport rep = tothkot_report(in);
  Emit(cfg, out, Dump(to_json(rep)));
  if (!rep.recipe.certificate || !rep.recipe.certificate->report.overall) {
    err << "certificate infeasible: " << rep.recipe.message << "\n";
    return kExitDomain;
  }
  if (!rep.decay->monotone || !rep.decay->decay_passed) {
    err << "decay check failed along the standard run\n";
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    switch (cfg.command) {
      case Command::kEquilibrium:
        return CmdEquilibrium(cfg, out);
      case Command::kSimulate:
        return CmdSimulate(cfg, err);
      case Command::kLyapunov:
        return CmdLyapunov(cfg, out, err);
      case Command::kCertify:
        return CmdCertify(cfg, out, err);
      case Command::kScan:
        return CmdScan(cfg, out);
      case Command::kTothKot:
        return CmdTothKot(cfg, out, err);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Age-structured chemostat: equilibria, simulation, Lyapunov diagnostics, certificates"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model_path, "Model JSON")->required();
  };
  auto add_out = [&](CLI::App* sub, const std::string& what) { sub->add_option("--out", cfg.out, what); };
  const auto positive = CLI::PositiveNumber;

  CLI::App* eq = app.add_subcommand("equilibrium", "Interior equilibrium as JSON");
  add_model(eq);
  eq->add_option("--scheme", cfg.scheme, "accurate (default) or consistent");
  add_out(eq, "Output file (default stdout)");

  CLI::App* sim = app.add_subcommand("simulate", "Simulate and write trajectory CSV");
  add_model(sim);
  sim->add_option("--initial", cfg.initial_path, "Initial-condition JSON (default: standard perturbed run)");
  sim->add_option("--horizon", cfg.horizon, "Final time (default 30/D)")->check(positive);
  sim->add_option("--dt", cfg.dt, "Time step, equal to the age step")->check(positive);
  sim->add_option("--stride", cfg.stride, "Output every n-th step")->check(CLI::Range(1, 1 << 30));
  sim->add_flag("--assert-bounds", cfg.assert_bounds, "Check pathwise bounds; exit 1 on violation");
  sim->add_option("--assumption-b", cfg.assumption_b_path, "Assumption-B JSON (for --assert-bounds)");
  sim->add_flag("--snapshots", cfg.snapshots, "Write profile snapshots and snapshots.csv");
  add_out(sim, "Output directory (default .)");

  CLI::App* lyap = app.add_subcommand("lyapunov", "Lyapunov diagnostics along saved snapshots");
  add_model(lyap);
  lyap->add_option("--trajectory", cfg.trajectory_path, "snapshots.csv written by simulate --snapshots")
      ->required();
  lyap->add_option("--weights", cfg.weights_path, "Weights JSON (sigma, B, Gamma, M)");
  lyap->add_option("--certificate", cfg.certificate_path, "Certificate JSON from certify");
  lyap->add_option("--assumption-b", cfg.assumption_b_path, "Assumption-B JSON (enables U)");
  lyap->add_option("--dt", cfg.dt, "Age step used for the simulation")->check(positive);
  lyap->add_option("--scheme", cfg.scheme, "Equilibrium scheme: consistent (default) or accurate");
  add_out(lyap, "Output CSV (default stdout)");

  CLI::App* cert = app.add_subcommand("certify", "Check the stability conditions");
  add_model(cert);
  cert->add_option("--assumption-b", cfg.assumption_b_path, "Assumption-B JSON (for --search)");
  cert->add_flag("--recipe", cfg.recipe, "Closed-form recipe for the Toth-Kot model");
  cert->add_flag("--search", cfg.search, "Derivative-free search over the constants");
  cert->add_option("--budget", cfg.budget, "Search evaluations")->check(CLI::NonNegativeNumber);
  cert->add_option("--seed", cfg.seed, "Search seed");
  cert->add_option("--F", cfg.F, "Fixed mass bound of the trapping region")->check(positive);
  add_out(cert, "Output file (default stdout)");

  CLI::App* scan = app.add_subcommand("scan", "Recipe feasibility against the thresholds on a D grid");
  scan->add_option("--L", cfg.L, "Mortality")->check(CLI::NonNegativeNumber);
  scan->add_option("--k-tilde", cfg.k_tilde, "Birth-modulus decay rate")->check(CLI::NonNegativeNumber);
  scan->add_option("--d-min", cfg.d_min, "Grid start (default T9/2)")->check(positive);
  scan->add_option("--d-max", cfg.d_max, "Grid end (default 2 T9)")->check(positive);
  scan->add_option("--points", cfg.points, "Grid size");
  add_out(scan, "Output CSV (default stdout)");

  CLI::App* tk = app.add_subcommand("tothkot", "End-to-end report for the Toth-Kot model");
  tk->add_option("--Y", cfg.Y, "Birth-modulus amplitude")->check(positive);
  tk->add_option("--k-tilde", cfg.k_tilde, "Birth-modulus decay rate")->check(CLI::NonNegativeNumber);
  tk->add_option("--L", cfg.L, "Mortality")->check(CLI::NonNegativeNumber);
  tk->add_option("--D", cfg.D, "Dilution rate")->check(positive);
  tk->add_option("--S-in", cfg.s_in, "Inlet substrate")->check(positive);
  tk->add_option("--mu-rate", cfg.mu_rate, "Slope of the linear growth law")->check(positive);
  tk->add_option("--n-age", cfg.n_age, "Age nodes")->check(CLI::Range(3, 1 << 26));
  tk->add_option("--horizon", cfg.horizon, "Final time of the decay run (default 30/D)")->check(positive);
  tk->add_option("--stride", cfg.stride, "Steps between decay samples")->check(CLI::Range(1, 1 << 30));
  add_out(tk, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (eq->parsed()) cfg.command = Command::kEquilibrium;
  if (sim->parsed()) cfg.command = Command::kSimulate;
  if (lyap->parsed()) cfg.command = Command::kLyapunov;
  if (cert->parsed()) cfg.command = Command::kCertify;
  if (scan->parsed()) cfg.command = Command::kScan;
  if (tk->parsed()) cfg.command = Command::kTothKot;
  return run(cfg, out, err);
}

}  // namespace agechem::cli

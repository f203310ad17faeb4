#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "agechem/errors.hpp"
#include "agechem/lyapunov.hpp"
#include "agechem_cli/io.hpp"
#include "agechem_cli/pipeline.hpp"
#include "agechem_cli/run.hpp"

namespace agechem::cli {
namespace {

namespace fs = std::filesystem;

const char* kModel = R"({
  "mu": {"family": "linear", "c": 1},
  "beta": {"family": "constant", "value": 1},
  "k": {"family": "exp_decay", "amplitude": 2, "rate": 2},
  "q": {"family": "constant", "value": 1},
  "S_in": 2, "D": 0.2, "n_age": 1001
})";

// Exact decomposition of the model above: b = -(k + L)/D, gamma = -L/D,
// theta = (D + L + k)/(Y (D + L)), R = Y.
const char* kDecomposition =
    R"({"b": -15, "gamma": -5, "theta": 1.3333333333333333, "alpha": 0, "delta": 0, "R": 2})";

fs::path Scratch(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("agechem_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path WriteText(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "agechem");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

TEST(ModelJson, RoundTrip) {
  const ModelParams p = parse_model(Json::parse(kModel));
  EXPECT_EQ(p.n_age(), 1001u);
  EXPECT_DOUBLE_EQ(p.a_max(), ModelParams::default_a_max(0.2, 1.0));
  const ModelParams back = parse_model(to_json(p));
  EXPECT_EQ(to_json(back), to_json(p));
}

TEST(ModelJson, MonodAndTabulated) {
  Json j = Json::parse(kModel);
  j["mu"] = {{"family", "monod"}, {"m", 3.0}, {"a_half", 0.5}};
  j["beta"] = {{"family", "tabulated"}, {"ages", {0.0, 1.0}}, {"values", {1.0, 2.0}}};
  const ModelParams p = parse_model(j);
  EXPECT_EQ(p.mu().family(), GrowthLaw::Family::kMonod);
  EXPECT_DOUBLE_EQ(p.mu().half_saturation(), 0.5);
  EXPECT_DOUBLE_EQ(p.beta().value(0.5), 1.5);
}

TEST(ModelJson, RejectsUnknownFields) {
  Json top = Json::parse(kModel);
  top["extra"] = 1;
  EXPECT_THROW(parse_model(top), InputError);
  Json nested = Json::parse(kModel);
  nested["k"]["shift"] = 0.0;
  try {
    parse_model(nested);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("model.k"), std::string::npos);
  }
}

TEST(ModelJson, RejectsMissingAndMalformedFields) {
  Json missing = Json::parse(kModel);
  missing.erase("D");
  EXPECT_THROW(parse_model(missing), InputError);
  Json family = Json::parse(kModel);
  family["q"]["family"] = "gaussian";
  EXPECT_THROW(parse_model(family), InputError);
  Json n = Json::parse(kModel);
  n["n_age"] = 10.5;
  EXPECT_THROW(parse_model(n), InputError);
  Json text = Json::parse(kModel);
  text["S_in"] = "2";
  EXPECT_THROW(parse_model(text), InputError);
}

TEST(ConfigJson, InitialNeedsExactlyOneProfile) {
  EXPECT_THROW(parse_initial(Json::parse(R"({"S0": 1})")), InputError);
  EXPECT_THROW(parse_initial(Json::parse(R"({"S0": 1, "samples": [1], "profile": {"family": "constant", "value": 1}})")),
               InputError);
  const InitialCondition ic = parse_initial(Json::parse(R"({"S0": 1, "samples": [1, 2]})"));
  EXPECT_EQ(ic.samples.size(), 2u);
  EXPECT_FALSE(ic.profile);
}

TEST(ConfigJson, WeightsDefaultsAndAssumptionB) {
  const LyapunovWeights w = parse_weights(Json::parse(R"({"B": 0.5})"));
  EXPECT_EQ(w.sigma, 0.0);
  EXPECT_EQ(w.B, 0.5);
  EXPECT_EQ(w.Gamma, 1.0);
  const AssumptionBData d = parse_assumption_b(
      Json::parse(R"({"b": 0, "gamma": 1, "theta": 2, "alpha": 0.5, "delta": 0.1, "R": 3,
                     "h": {"family": "exp_decay", "amplitude": 1, "rate": 1}})"));
  EXPECT_EQ(d.gamma, 1.0);
  EXPECT_EQ(d.ratio_bound, 3.0);
  EXPECT_DOUBLE_EQ(d.h.value(1.0), std::exp(-1.0));
  EXPECT_EQ(d.p.value(3.0), 0.0);
  EXPECT_EQ(to_json(parse_assumption_b(to_json(d))), to_json(d));
}

TEST(ConfigJson, ConstantsRoundTrip) {
  CertificateConstants k;
  k.sigma = 0.6;
  k.B = 0.0045;
  k.F = 8.0;
  EXPECT_EQ(to_json(parse_constants(to_json(k))), to_json(k));
}

TEST(Numbers, SeventeenDigitsRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(mant(rng), expo(rng));
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(number(INFINITY), "inf");
  EXPECT_EQ(number(-INFINITY), "-inf");
  EXPECT_EQ(number(NAN), "nan");
}

TEST(Csv, HeaderAndWidth) {
  std::ostringstream out;
  CsvWriter csv(out, {"t", "V"});
  csv.row({0.0, 0.1});
  EXPECT_EQ(out.str(), "t,V\n0,0.10000000000000001\n");
  EXPECT_THROW(csv.row({1.0}), InputError);
}

class StandardRun : public ::testing::Test {
 protected:
  ModelParams params = parse_model(Json::parse(kModel));
  Equilibrium eq = solve_equilibrium(params, EquilibriumScheme::kSchemeConsistent);
};

TEST_F(StandardRun, NormalizedInitialValues) {
  const State s0 = standard_perturbed_run(eq, params);
  EXPECT_EQ(s0.s, eq.s_star);
  const LyapunovWeights w{0.3, 0.2, 0.7, 1.1};
  const LyapunovEvaluator ev(params, eq, w);
  const NormalizedVars nv = ev.normalized_vars(s0);
  EXPECT_NEAR(nv.zeta, 1.5, 1e-12);
  EXPECT_NEAR(nv.xi, 1.5, 1e-12);
  EXPECT_NEAR(nv.phi, 0.0, 1e-12);
  EXPECT_NEAR(nv.w, std::log(1.5), 1e-12);
  for (double c : nv.chi) EXPECT_NEAR(c, 0.0, 1e-12);
  EXPECT_NEAR(ev.lyapunov_V(s0), w.Gamma * (0.5 - std::log(1.5)), 1e-12);
}

TEST_F(StandardRun, Horizon) { EXPECT_DOUBLE_EQ(standard_horizon(params), 150.0); }

TEST(Cli, MissingModelFileIsUsageError) {
  const Result r = Invoke({"equilibrium", "--model", "/nonexistent/model.json"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("cannot open"), std::string::npos);
}

TEST(Cli, UnknownFlagAndMissingSubcommand) {
  EXPECT_EQ(Invoke({"scan", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(Invoke({}).code, kExitUsage);
  EXPECT_EQ(Invoke({"--help"}).code, kExitOk);
}

TEST(Cli, WashoutIsDomainError) {
  const fs::path dir = Scratch("washout");
  Json j = Json::parse(kModel);
  j["D"] = 3.0;
  const Result r = Invoke({"equilibrium", "--model", WriteText(dir / "m.json", j.dump()).string()});
  EXPECT_EQ(r.code, kExitDomain);
  EXPECT_NE(r.err.find("washout"), std::string::npos);
}

TEST(Cli, EquilibriumJson) {
  const fs::path dir = Scratch("equilibrium");
  Json m = Json::parse(kModel);
  m["n_age"] = 4001;
  const std::string model = WriteText(dir / "m.json", m.dump()).string();
  const Result r = Invoke({"equilibrium", "--model", model});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  // mu* = (D + L + k_tilde)/Y, S* = mu*/c.
  EXPECT_NEAR(j["S_star"].get<double>(), 1.6, 1e-9);
  EXPECT_NEAR(j["kappa1"].get<double>(), 1.2, 1e-9);
  EXPECT_NEAR(j["kappa2"].get<double>(), 3.2, 1e-9);
  EXPECT_EQ(Invoke({"equilibrium", "--model", model}).out, r.out);
}

TEST(Cli, TothKotReportAtDefaultPoint) {
  const Result r = Invoke({"tothkot", "--n-age", "1001"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  EXPECT_DOUBLE_EQ(j["thresholds"]["threshold_4_9"].get<double>(), 0.125);
  EXPECT_DOUBLE_EQ(j["thresholds"]["threshold_4_10"].get<double>(), 0.0625);
  EXPECT_TRUE(j["certificate"]["feasible"].get<bool>());
  EXPECT_TRUE(j["decay"]["monotone"].get<bool>());
  EXPECT_TRUE(j["decay"]["decay_passed"].get<bool>());
  EXPECT_LT(j["decay"]["V_end"].get<double>(), j["decay"]["V0"].get<double>());
}

TEST(Cli, TothKotInfeasibleExitsOne) {
  const Result r = Invoke({"tothkot", "--D", "0.1", "--n-age", "1001"});
  EXPECT_EQ(r.code, kExitDomain);
  EXPECT_NE(r.err.find("infeasible"), std::string::npos);
  const Json j = Json::parse(r.out);
  EXPECT_FALSE(j["certificate"]["feasible"].get<bool>());
  EXPECT_TRUE(j["decay"].is_null());
}

TEST(Cli, ScanCsv) {
  const Result r = Invoke({"scan", "--L", "1", "--k-tilde", "2", "--points", "5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out,
            "D,recipe_feasible,cond_4_9,cond_4_10\n"
            "0.0625,0,0,1\n"
            "0.109375,0,0,1\n"
            "0.15625,1,1,1\n"
            "0.203125,1,1,1\n"
            "0.25,1,1,1\n");
}

TEST(Cli, CertifyNeedsOneMethod) {
  const fs::path dir = Scratch("certify_usage");
  const std::string model = WriteText(dir / "m.json", kModel).string();
  EXPECT_EQ(Invoke({"certify", "--model", model}).code, kExitUsage);
  EXPECT_EQ(Invoke({"certify", "--model", model, "--recipe", "--search"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"certify", "--model", model, "--search"}).code, kExitUsage);
}

TEST(Cli, SimulateLyapunovPipeline) {
  const fs::path dir = Scratch("pipeline");
  const std::string model = WriteText(dir / "m.json", kModel).string();
  const std::string ab =
      WriteText(dir / "ab.json", kDecomposition)
          .string();
  const Result cert = Invoke({"certify", "--model", model, "--recipe", "--out", (dir / "cert.json").string()});
  ASSERT_EQ(cert.code, kExitOk) << cert.err;

  const fs::path out = dir / "run";
  const Result sim = Invoke({"simulate", "--model", model, "--horizon", "3", "--stride", "20", "--snapshots",
                          "--assert-bounds", "--assumption-b", ab, "--out", out.string()});
  ASSERT_EQ(sim.code, kExitOk) << sim.err;
  const CsvTable traj = read_csv(out / "trajectory.csv");
  EXPECT_EQ(traj.header, (std::vector<std::string>{"t", "S", "mass", "kf", "qf", "x"}));
  // Horizon override is respected: the last row sits within one stride of t = 3.
  const double t_last = parse_double(traj.rows.back()[0], "t");
  EXPECT_LE(t_last, 3.0 + 1e-9);
  EXPECT_GT(t_last, 3.0 - 20.0 * 0.2);
  EXPECT_TRUE(read_json_file(out / "bounds.json")["all_passed"].get<bool>());

  const Result lyap = Invoke({"lyapunov", "--model", model, "--trajectory", (out / "snapshots.csv").string(),
                           "--certificate", (dir / "cert.json").string(), "--assumption-b", ab});
  ASSERT_EQ(lyap.code, kExitOk) << lyap.err;
  std::istringstream lines(lyap.out);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "t,V,Q,Psi,E,U,U_fd,slack,V_phi,V_w,V_chi");
  std::string line;
  double prev_v = INFINITY;
  int rows = 0;
  while (std::getline(lines, line)) {
    const double v = std::stod(line.substr(line.find(',') + 1));
    EXPECT_LE(v, prev_v);
    prev_v = v;
    ++rows;
  }
  EXPECT_EQ(static_cast<std::size_t>(rows), read_snapshot_index(out / "snapshots.csv").size());
}

TEST(Cli, OutputsAreDeterministic) {
  const fs::path dir = Scratch("determinism");
  const std::string model = WriteText(dir / "m.json", kModel).string();
  for (const char* name : {"a", "b"}) {
    ASSERT_EQ(Invoke({"simulate", "--model", model, "--horizon", "2", "--snapshots", "--stride", "40", "--out",
                   (dir / name).string()})
                  .code,
              kExitOk);
  }
  EXPECT_EQ(ReadText(dir / "a" / "trajectory.csv"), ReadText(dir / "b" / "trajectory.csv"));
  EXPECT_EQ(ReadText(dir / "a" / "snapshots" / "snap_000001.csv"),
            ReadText(dir / "b" / "snapshots" / "snap_000001.csv"));
  const std::vector<std::string> search = {"certify", "--model", model, "--search", "--budget", "200",
                                           "--assumption-b",
                                           WriteText(dir / "ab.json",
                                                     kDecomposition)
                                               .string()};
  const Result s1 = Invoke(search);
  const Result s2 = Invoke(search);
  EXPECT_EQ(s1.out, s2.out);
  EXPECT_EQ(s1.code, s2.code);
}

}  // namespace
}  // namespace agechem::cli

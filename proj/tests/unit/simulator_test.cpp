#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "agechem/equilibrium.hpp"
#include "agechem/errors.hpp"
#include "agechem/simulator.hpp"
#include "moment_oracle.hpp"
#include "models.hpp"

namespace agechem {
namespace {

using testing::IntegrateMoments;
using testing::MomentPoint;
using testing::TothKotInputs;
using testing::TothKotParamsWithStep;

State EquilibriumState(const Equilibrium& eq) { return State{eq.f_star_profile(), eq.s_star, 0.0}; }

TEST(Simulator, EquilibriumIsAFixedPoint) {
  const auto params = TothKotParamsWithStep({}, 0.01);
  const auto eq = solve_equilibrium(params, EquilibriumScheme::kSchemeConsistent);
  const Simulator sim(params);
  State st = EquilibriumState(eq);
  for (int j = 0; j < 50; ++j) {
    sim.step(st);
    double worst = 0.0;
    for (std::size_t i = 0; i < st.f.size(); ++i) {
      worst = std::max(worst, std::abs(st.f[i] - eq.f_star(i)) / eq.f_star0);
    }
    ASSERT_LT(worst, 1e-10) << "step " << j;
    ASSERT_LT(std::abs(st.s - eq.s_star), 1e-10);
  }
}

TEST(Simulator, ZeroGrowthGivesPureDecay) {
  const ModelParams params(GrowthLaw::Linear(0.0), AgeFunction::MakeTabulated({0.0, 3.0}, {0.1, 0.7}),
                           AgeFunction::MakeConstant(1.0), AgeFunction::MakeConstant(1.0), 2.0, 0.5, 6.0, 301);
  const Simulator sim(params);
  State st = sim.make_initial(1.0, AgeFunction::MakeExpDecay(1.0, 0.3));
  const auto before = st.f;
  const auto decay = decay_factors(params);
  sim.step(st);
  EXPECT_EQ(st.f[0], 0.0);
  for (std::size_t i = 0; i + 1 < before.size(); ++i) EXPECT_DOUBLE_EQ(st.f[i + 1], before[i] * decay[i]);
}

TEST(Simulator, ZeroHorizonKeepsOnlyTheInitialState) {
  const auto params = TothKotParamsWithStep({}, 0.05);
  const auto eq = solve_equilibrium(params, EquilibriumScheme::kSchemeConsistent);
  const Simulator sim(params);
  SimulationOptions opts;
  opts.horizon = 0.0;
  opts.keep_snapshots = true;
  const auto traj = sim.simulate(EquilibriumState(eq), opts);
  ASSERT_EQ(traj.records.size(), 1u);
  ASSERT_EQ(traj.snapshots.size(), 1u);
  EXPECT_EQ(traj.snapshots[0].t, 0.0);
}

TEST(Simulator, SnapshotsAreEquallySpaced) {
  const auto params = TothKotParamsWithStep({}, 0.05);
  const auto eq = solve_equilibrium(params, EquilibriumScheme::kSchemeConsistent);
  const Simulator sim(params);
  SimulationOptions opts;
  opts.horizon = 2.0;
  opts.stride = 4;
  opts.keep_snapshots = true;
  const auto traj = sim.simulate(EquilibriumState(eq), opts);
  EXPECT_EQ(traj.records.size(), 41u);
  ASSERT_EQ(traj.snapshots.size(), 11u);
  for (std::size_t j = 1; j < traj.snapshots.size(); ++j) {
    EXPECT_NEAR(traj.snapshots[j].t - traj.snapshots[j - 1].t, 4 * traj.dt, 1e-12);
  }
}

TEST(Simulator, ProjectsIncompatibleBoundaryWithWarning) {
  const auto params = TothKotParamsWithStep({}, 0.05);
  const Simulator sim(params);
  std::vector<std::string> warnings;
  const State st = sim.make_initial(1.0, AgeFunction::MakeExpDecay(1.0, 1.5), &warnings);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NEAR(st.f[0], sim.boundary_value(1.0, st.f), 1e-14);
  EXPECT_THROW(sim.make_initial(2.5, AgeFunction::MakeExpDecay(1.0, 1.5)), InputError);
}

TEST(Simulator, CoarseGridBoundaryClosureFails) {
  TothKotInputs in;
  in.Y = 50.0;
  const Simulator sim(TothKotParamsWithStep(in, 0.5));  // mu(S) k(0) da / 2 = 12.5 S
  State st{std::vector<double>(sim.params().n_age(), 0.1), 1.0, 0.0};
  EXPECT_THROW(sim.step(st), DomainError);
}

// Perturbed Toth-Kot run compared against the closed moment system.
struct ConvergenceSample {
  double moment_error = 0.0;
  double profile_error = 0.0;
};

ConvergenceSample RunAgainstOracle(double step) {
  const TothKotInputs in;
  const auto params = TothKotParamsWithStep(in, step);
  const double s_star = (in.D + in.L + in.k_tilde) / (in.c * in.Y);
  const double f0_star = in.Y * in.D * (in.D + in.L) * (in.s_in - s_star) / (in.D + in.L + in.k_tilde);
  const auto f0 = AgeFunction::MakeExpDecay(1.5 * f0_star, in.D + in.L);
  const Simulator sim(params);
  SimulationOptions opts;
  opts.horizon = 5.0;
  opts.keep_snapshots = true;
  opts.stride = static_cast<std::size_t>(std::lround(opts.horizon / sim.dt()));
  const auto traj = sim.simulate(sim.make_initial(s_star, f0), opts);

  MomentPoint p0{1.5 * f0_star * in.Y / (in.D + in.L + in.k_tilde), 1.5 * f0_star / (in.D + in.L), s_star};
  const auto oracle = IntegrateMoments(in, p0, sim.dt(), traj.records.size() - 1);
  ConvergenceSample out;
  BoundaryHistory history{sim.dt(), {}};
  for (std::size_t j = 0; j < traj.records.size(); ++j) {
    const auto& r = traj.records[j];
    out.moment_error = std::max({out.moment_error, std::abs(r.kf - oracle[j].K), std::abs(r.qf - oracle[j].Q),
                                 std::abs(r.s - oracle[j].S)});
    history.x.push_back(in.c * oracle[j].S * oracle[j].K);
  }
  const State& last = traj.snapshots.back();
  const AgeGrid grid = params.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double want = oracle_profile(last.t, grid.age(i), history, f0, params);
    out.profile_error = std::max(out.profile_error, std::abs(last.f[i] - want));
  }
  return out;
}

TEST(Simulator, ConvergesToMomentAndCharacteristicOracles) {
  const auto coarse = RunAgainstOracle(0.02);
  const auto fine = RunAgainstOracle(0.01);
  EXPECT_LT(coarse.moment_error, 1e-2);
  EXPECT_GE(coarse.moment_error / fine.moment_error, 1.8);
  EXPECT_GE(coarse.profile_error / fine.profile_error, 1.8);
}

TEST(OracleProfile, InitialTimeAndBoundary) {
  const auto params = TothKotParamsWithStep({}, 0.05);
  const auto f0 = AgeFunction::MakeExpDecay(2.0, 0.7);
  BoundaryHistory history{0.5, {1.0, 2.0, 4.0}};
  EXPECT_DOUBLE_EQ(oracle_profile(0.0, 1.3, history, f0, params), f0.value(1.3));
  EXPECT_DOUBLE_EQ(oracle_profile(0.75, 0.0, history, f0, params), 3.0);
  EXPECT_THROW(oracle_profile(2.0, 0.5, history, f0, params), InputError);
}

TEST(Simulator, MassBalanceMatchesFiniteDifferences) {
  const TothKotInputs in;
  const auto params = TothKotParamsWithStep(in, 0.01);
  const Simulator sim(params);
  SimulationOptions opts;
  opts.horizon = 3.0;
  const auto traj = sim.simulate(sim.make_initial(0.5, AgeFunction::MakeExpDecay(3.0, 2.0)), opts);
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < traj.records.size(); ++j) {
    const auto& r = traj.records[j];
    const double fd = (traj.records[j + 1].mass - traj.records[j - 1].mass) / (2 * traj.dt);
    worst = std::max(worst, std::abs(fd - (r.x - in.D * r.mass - r.bf)));
  }
  EXPECT_LT(worst, 0.05);
}

std::vector<double> RandomProfile(const ModelParams& params, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 3.0);
  std::vector<double> ages, values;
  const double decay = u(rng);
  for (double a = 0.0; a <= 8.0; a += 1.0) {
    ages.push_back(a);
    values.push_back(u(rng) * std::exp(-decay * a));
  }
  ages.push_back(params.a_max());
  values.push_back(1e-14);
  return params.grid().sample(AgeFunction::MakeTabulated(ages, values));
}

TEST(PathwiseBounds, HoldAlongRandomRuns) {
  const TothKotInputs in;
  const auto params = TothKotParamsWithStep(in, 0.02);
  const Simulator sim(params);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> s0(0.1 * in.s_in, 0.9 * in.s_in);
  PathwiseBoundsInput bounds;
  bounds.ratio_bound = in.Y;
  bounds.b = -(in.k_tilde + in.L) / in.D;
  bounds.gamma = -in.L / in.D;
  for (int trial = 0; trial < 4; ++trial) {
    SimulationOptions opts;
    opts.horizon = 8.0;
    const auto traj = sim.simulate(sim.make_initial(s0(rng), RandomProfile(params, rng)), opts);
    const auto report = check_pathwise_bounds(traj, params, bounds);
    for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.worst_slack;
    EXPECT_EQ(report.checks.size(), 5u);
    for (const auto& r : traj.records) ASSERT_TRUE(r.s > 0.0 && r.s < in.s_in);
  }
}

TEST(Trapping, InitialInsideRegionEntersAtZero) {
  const TothKotInputs in;
  const auto params = TothKotParamsWithStep(in, 0.05);
  const auto eq = solve_equilibrium(params, EquilibriumScheme::kSchemeConsistent);
  const Simulator sim(params);
  SimulationOptions opts;
  opts.horizon = 1.0;
  const auto traj = sim.simulate(EquilibriumState(eq), opts);
  const auto st = trapping_report(traj, params, 2 * in.Y * in.s_in, in.Y);
  ASSERT_TRUE(st.entered_at.has_value());
  EXPECT_EQ(*st.entered_at, 0.0);
  EXPECT_TRUE(st.within_bound);
}

TEST(Trapping, LargeInitialMassEntersBeforeBound) {
  const TothKotInputs in;
  const auto params = TothKotParamsWithStep(in, 0.02);
  const Simulator sim(params);
  const double F = 2 * in.Y * in.s_in;
  // ||f0||_1 = 3F for f0 = A e^{-a} on the truncated domain.
  const auto f0 = AgeFunction::MakeExpDecay(3 * F, 1.0);
  const State init = sim.make_initial(1.0, f0);
  const double t_bound = trapping_time_bound(params, F, in.Y, in.Y * 1.0 + sim.record(init).mass);
  SimulationOptions opts;
  opts.horizon = t_bound + 1.0;
  const auto traj = sim.simulate(init, opts);
  const auto st = trapping_report(traj, params, F, in.Y);
  ASSERT_TRUE(st.entered_at.has_value());
  EXPECT_TRUE(st.within_bound) << *st.entered_at << " vs " << st.t_bound;
  EXPECT_DOUBLE_EQ(st.s_lower, in.D * in.s_in / (2 * (in.D + in.c * F)));
}

TEST(Trapping, ShortHorizonIsInconclusive) {
  const TothKotInputs in;
  const auto params = TothKotParamsWithStep(in, 0.05);
  const Simulator sim(params);
  SimulationOptions opts;
  opts.horizon = 0.1;
  const auto traj = sim.simulate(sim.make_initial(1.0, AgeFunction::MakeExpDecay(30.0, 1.0)), opts);
  EXPECT_THROW(trapping_report(traj, params, 2 * in.Y * in.s_in, in.Y), DomainError);
}

}  // namespace
}  // namespace agechem

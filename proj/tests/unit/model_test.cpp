#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "agechem/errors.hpp"
#include "agechem/model.hpp"
#include "models.hpp"

namespace agechem {
namespace {

using testing::TothKotInputs;
using testing::TothKotParams;

ModelParams MonodModel() {
  return ModelParams(GrowthLaw::Monod(1.0, 1.0), AgeFunction::MakeConstant(0.5), AgeFunction::MakeExpDecay(2.0, 0.5),
                     AgeFunction::MakeConstant(1.0), 2.0, 1.0, 30.0, 601);
}

TEST(ValidateModel, MonodReferenceModelPassesEveryCheck) {
  const auto report = validate_model(MonodModel());
  for (const auto& item : report.items) EXPECT_TRUE(item.passed) << item.name << " " << item.witness;
  EXPECT_TRUE(report.all_passed());
  ASSERT_NE(report.find("integral k > 0"), nullptr);
  EXPECT_DOUBLE_EQ(report.find("integral k > 0")->witness, 4.0);
}

TEST(ValidateModel, DecreasingGrowthFailsMonotonicity) {
  const ModelParams params(GrowthLaw::Linear(-1.0), AgeFunction::MakeConstant(0.5),
                           AgeFunction::MakeExpDecay(2.0, 0.5), AgeFunction::MakeConstant(1.0), 2.0, 1.0, 30.0,
                           101);
  const auto report = validate_model(params);
  EXPECT_FALSE(report.all_passed());
  EXPECT_FALSE(report.find("mu increasing")->passed);
  EXPECT_DOUBLE_EQ(report.find("mu increasing")->witness, -1.0);
}

TEST(ValidateModel, ZeroBirthModulusFailsIntegralCheck) {
  const ModelParams params(GrowthLaw::Linear(1.0), AgeFunction::MakeConstant(0.5), AgeFunction::MakeConstant(0.0),
                           AgeFunction::MakeConstant(1.0), 2.0, 1.0, 30.0, 101);
  const auto report = validate_model(params);
  EXPECT_FALSE(report.find("integral k > 0")->passed);
  EXPECT_TRUE(report.find("integral q > 0")->passed);
}

TEST(ValidateModel, NegativeMortalityIsReported) {
  const ModelParams params(GrowthLaw::Linear(1.0), AgeFunction::MakeTabulated({0.0, 1.0}, {0.2, -0.1}),
                           AgeFunction::MakeExpDecay(2.0, 0.5), AgeFunction::MakeConstant(1.0), 2.0, 1.0, 30.0, 101);
  const auto report = validate_model(params);
  EXPECT_FALSE(report.find("beta non-negative")->passed);
  EXPECT_DOUBLE_EQ(report.find("beta non-negative")->witness, -0.1);
}

TEST(ModelParams, CachesMortalityInfimumAndGrowthLipschitz) {
  const auto params = MonodModel();
  EXPECT_DOUBLE_EQ(params.min_mortality(), 0.5);
  EXPECT_DOUBLE_EQ(params.growth_lipschitz(), 1.0);
  EXPECT_DOUBLE_EQ(params.age_step(), 0.05);
}

TEST(ModelParams, WithStepKeepsWholeCells) {
  const auto params = MonodModel().with_step(0.07);
  EXPECT_NEAR(params.age_step(), 0.07, 1e-15);
  EXPECT_GE(params.a_max(), 30.0);
}

TEST(ModelParams, RejectsBadScalars) {
  EXPECT_THROW(ModelParams(GrowthLaw::Linear(1.0), {}, {}, {}, 0.0, 1.0, 1.0, 10), InputError);
  EXPECT_THROW(ModelParams(GrowthLaw::Linear(1.0), {}, {}, {}, 1.0, -1.0, 1.0, 10), InputError);
  EXPECT_THROW(ModelParams(GrowthLaw::Linear(1.0), {}, {}, {}, 1.0, 1.0, 1.0, 1), InputError);
}

TEST(AssumptionA, TothKotHoldsWithRatioY) {
  const auto params = TothKotParams({}, 401);
  const auto report = verify_assumption_A(params, 2.0);
  EXPECT_TRUE(report.holds);
  EXPECT_DOUBLE_EQ(report.worst_ratio, 2.0);
  EXPECT_DOUBLE_EQ(report.worst_age, 0.0);
}

TEST(AssumptionA, HalfOfYFailsWithWitnessAtZero) {
  const auto params = TothKotParams({}, 401);
  const auto report = verify_assumption_A(params, 1.0);
  EXPECT_FALSE(report.holds);
  EXPECT_FALSE(report.no_finite_bound);
  EXPECT_DOUBLE_EQ(report.worst_age, 0.0);
}

TEST(AssumptionA, ZeroBirthModulusHoldsForAnyRatio) {
  const ModelParams params(GrowthLaw::Linear(1.0), AgeFunction::MakeConstant(0.5), AgeFunction::MakeConstant(0.0),
                           AgeFunction::MakeConstant(1.0), 2.0, 1.0, 30.0, 101);
  EXPECT_TRUE(verify_assumption_A(params, 1e-6).holds);
}

TEST(AssumptionA, VanishingConsumptionMeansNoFiniteBound) {
  const ModelParams params(GrowthLaw::Linear(1.0), AgeFunction::MakeConstant(0.5), AgeFunction::MakeConstant(1.0),
                           AgeFunction::MakeTabulated({0.0, 1.0}, {1.0, 0.0}), 2.0, 1.0, 30.0, 101);
  const auto report = verify_assumption_A(params, 100.0);
  EXPECT_FALSE(report.holds);
  EXPECT_TRUE(report.no_finite_bound);
  EXPECT_NE(report.message.find("no finite R exists"), std::string::npos);
}

TEST(AssumptionA, SlowerDecayingBirthModulusFailsInTail) {
  const ModelParams params(GrowthLaw::Linear(1.0), AgeFunction::MakeConstant(0.5),
                           AgeFunction::MakeExpDecay(1.0, 0.1), AgeFunction::MakeExpDecay(1.0, 0.2), 2.0, 1.0, 5.0,
                           101);
  const auto report = verify_assumption_A(params, 10.0);  // grid ratio <= e^{0.5}
  EXPECT_FALSE(report.holds);
  EXPECT_TRUE(std::isinf(report.worst_age));
}

TEST(AssumptionA, MonotoneInRatioBound) {
  const auto params = TothKotParams({}, 201);
  bool seen_true = false;
  for (double r = 0.5; r <= 4.0; r += 0.125) {
    const bool holds = verify_assumption_A(params, r).holds;
    if (seen_true) EXPECT_TRUE(holds) << r;
    seen_true = seen_true || holds;
  }
  EXPECT_TRUE(seen_true);
}

AssumptionBData TothKotDecomposition(const TothKotInputs& in) {
  AssumptionBData data;
  data.gamma = -in.L / in.D;
  data.b = -(in.k_tilde + in.L) / in.D;
  data.theta = (in.D + in.L + in.k_tilde) / (in.Y * (in.D + in.L));
  data.ratio_bound = in.Y;
  return data;
}

TEST(AssumptionB, TothKotDecompositionHasZeroResidual) {
  const TothKotInputs in;
  for (std::size_t n : {11u, 401u, 4001u}) {
    const auto report = verify_assumption_B(TothKotParams(in, n), TothKotDecomposition(in));
    EXPECT_TRUE(report.passed);
    EXPECT_LE(report.max_h_mismatch, 1e-15);
    EXPECT_LE(report.max_p_mismatch, 1e-14);
  }
}

TEST(AssumptionB, ZeroGammaWithMortalityGivesNegativeResidual) {
  const TothKotInputs in;
  auto data = TothKotDecomposition(in);
  data.gamma = 0.0;
  const auto report = verify_assumption_B(TothKotParams(in, 101), data);
  EXPECT_FALSE(report.passed);
  EXPECT_DOUBLE_EQ(report.min_h, -in.L);
  bool flagged = false;
  for (const auto& f : report.failures) {
    flagged = flagged || f.find("h or p not non-negative: assumption (B) violated") != std::string::npos;
  }
  EXPECT_TRUE(flagged);
}

TEST(AssumptionB, NoMortalityConstantConsumptionIsExact) {
  const ModelParams params(GrowthLaw::Linear(1.0), AgeFunction::MakeConstant(0.0), AgeFunction::MakeConstant(1.0),
                           AgeFunction::MakeConstant(1.0), 2.0, 1.0, 30.0, 101);
  AssumptionBData data;
  data.b = -1.0;  // k' - D b k = D k >= 0 residual stated exactly
  data.p = AgeFunction::MakeConstant(1.0);
  const auto report = verify_assumption_B(params, data);
  EXPECT_TRUE(report.passed);
  EXPECT_DOUBLE_EQ(report.min_h, 0.0);
}

TEST(AssumptionB, RejectsExponentAboveOne) {
  const TothKotInputs in;
  auto data = TothKotDecomposition(in);
  data.gamma = 1.5;
  data.h = AgeFunction::MakeConstant(-in.L - 1.5 * in.D);
  const auto report = verify_assumption_B(TothKotParams(in, 51), data);
  EXPECT_FALSE(report.gamma_at_most_one);
  EXPECT_FALSE(report.passed);
}

}  // namespace
}  // namespace agechem

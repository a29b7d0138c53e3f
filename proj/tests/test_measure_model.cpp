#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fairbound/measure_model.hpp"
#include "support/oracles.hpp"

using namespace fairbound;

namespace {

const std::vector<double> kBeta25{0, 30, -120, 180, -120, 30};

RawInstance early_peak_raw() { return fbtest::early_peak_instance(); }

bool mentions(const InstanceError& e, const std::string& what) {
  for (const auto& v : e.violations()) {
    if (v.message.find(what) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(EvalDensity, LinearAtHalf) {
  EXPECT_DOUBLE_EQ(eval_density(DensityFunction::polynomial({0, 2}), 0.5), 1.0);
}

TEST(EvalDensity, ConstantEverywhere) {
  const auto f = DensityFunction::polynomial({1});
  for (double x : {0.0, 0.3, 1.0}) EXPECT_DOUBLE_EQ(eval_density(f, x), 1.0);
}

TEST(EvalDensity, BetaPeakAtOneFifth) {
  // 30 * 0.2 * 0.8^4 = 2.4576.
  EXPECT_NEAR(eval_density(DensityFunction::polynomial(kBeta25), 0.2), 30 * 0.2 * std::pow(0.8, 4), 1e-12);
  EXPECT_NEAR(eval_density(DensityFunction::polynomial(kBeta25), 0.2), 2.4576, 1e-12);
}

TEST(EvalDensity, OutsideUnitIntervalIsDomainError) {
  const auto f = DensityFunction::polynomial({1});
  EXPECT_THROW(eval_density(f, -0.01), std::domain_error);
  EXPECT_THROW(eval_density(f, 1.5), std::domain_error);
}

TEST(EvalDensity, LeftPieceWinsAtSharedEndpoint) {
  const DensityFunction f({{0, 0.5, {1}}, {0.5, 1, {3}}});
  EXPECT_DOUBLE_EQ(f(0.5), 1.0);
  EXPECT_DOUBLE_EQ(f(0.5000001), 3.0);
}

TEST(MeasureOf, LinearOverUpperHalf) {
  EXPECT_NEAR(measure_of(DensityFunction::polynomial({0, 2}), IntervalSet({{0.5, 1}})), 0.75, 1e-15);
}

TEST(MeasureOf, BetaDensityIsNormalized) {
  EXPECT_NEAR(measure_of(DensityFunction::polynomial(kBeta25), IntervalSet::whole()), 1.0, 1e-13);
}

TEST(MeasureOf, BetaDistributionFunctionAtQuarter) {
  const double exact = 1 - std::pow(0.75, 6) - 6 * 0.25 * std::pow(0.75, 5);
  const double quad = fbtest::raw_integral({"f3", {{0, 1, kBeta25}}}, 0.0, 0.25);
  const double got = measure_of(DensityFunction::polynomial(kBeta25), IntervalSet({{0, 0.25}}));
  EXPECT_NEAR(got, exact, 1e-13);
  EXPECT_NEAR(got, quad, 1e-12);
}

TEST(MeasureOf, DegenerateIntervalHasNoMass) {
  const auto f = DensityFunction::polynomial(kBeta25);
  for (double x : {0.0, 0.2, 0.77, 1.0}) EXPECT_EQ(measure_of(f, IntervalSet({{x, x}})), 0.0);
}

TEST(MeasureOf, AdditiveAndMonotoneOnRandomSets) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto raw = fbtest::random_piecewise_linear(gen, "f");
    const DensityFunction f(raw.pieces);
    std::vector<double> cuts{u(gen), u(gen), u(gen), u(gen)};
    std::sort(cuts.begin(), cuts.end());
    const IntervalSet s({{cuts[0], cuts[1]}});
    const IntervalSet t({{cuts[2], cuts[3]}});
    const auto st = IntervalSet::unite(s, t);
    EXPECT_NEAR(measure_of(f, s) + measure_of(f, t), measure_of(f, st), 1e-12);
    EXPECT_LE(measure_of(f, s), measure_of(f, IntervalSet({{cuts[0], cuts[3]}})) + 1e-15);
    EXPECT_NEAR(measure_of(f, s), fbtest::raw_integral(raw, cuts[0], cuts[1]), 1e-12);
  }
}

TEST(TotalMass, Examples) {
  EXPECT_DOUBLE_EQ(total_mass(DensityFunction::polynomial({1})), 1.0);
  EXPECT_DOUBLE_EQ(total_mass(DensityFunction::polynomial({2})), 2.0);
  EXPECT_NEAR(total_mass(DensityFunction::polynomial(kBeta25)), 1.0, 1e-13);
}

TEST(TotalMass, ZeroDensityRejected) {
  EXPECT_THROW(DensityFunction::polynomial({0}), InstanceError);
}

TEST(IntervalSet, MergesTouchingAndRejectsOverlap) {
  const IntervalSet s({{0, 0.25}, {0.25, 0.5}, {0.75, 1}});
  ASSERT_EQ(s.parts().size(), 2u);
  EXPECT_DOUBLE_EQ(s.length(), 0.75);
  EXPECT_THROW(IntervalSet({{0, 0.5}, {0.4, 0.6}}), std::invalid_argument);
  EXPECT_THROW(IntervalSet({{-0.1, 0.5}}), std::invalid_argument);
  EXPECT_THROW(IntervalSet({{0.6, 0.5}}), std::invalid_argument);
}

TEST(ValidateInstance, EarlyPeakInstanceIsValid) {
  const auto inst = validate_instance(early_peak_raw());
  EXPECT_EQ(inst.n(), 3u);
  EXPECT_TRUE(inst.is_normalized());
}

TEST(ValidateInstance, BoundaryClaimRejected) {
  auto raw = early_peak_raw();
  raw.claims = {0.5, 0.5, 0.0};
  try {
    validate_instance(raw);
    FAIL() << "expected InstanceError";
  } catch (const InstanceError& e) {
    ASSERT_EQ(e.violations().size(), 1u);
    EXPECT_EQ(e.violations()[0].agent, std::optional<std::size_t>(2));
    EXPECT_TRUE(mentions(e, "interior"));
  }
}

TEST(ValidateInstance, GapRejectedWithIndices) {
  auto raw = early_peak_raw();
  raw.agents[1].pieces = {{0, 0.4, {1}}, {0.5, 1, {1}}};
  try {
    validate_instance(raw);
    FAIL() << "expected InstanceError";
  } catch (const InstanceError& e) {
    ASSERT_FALSE(e.violations().empty());
    EXPECT_EQ(e.violations()[0].agent, std::optional<std::size_t>(1));
    EXPECT_EQ(e.violations()[0].piece, std::optional<std::size_t>(1));
    EXPECT_TRUE(mentions(e, "gap"));
  }
}

TEST(ValidateInstance, ReportsEveryViolation) {
  RawInstance raw;
  raw.claims = {0.7, 0.7};
  raw.agents = {{"neg", {{0, 1, {-1, 0.5}}}}, {"overlap", {{0, 0.6, {1}}, {0.5, 1, {1}}}}};
  try {
    validate_instance(raw);
    FAIL() << "expected InstanceError";
  } catch (const InstanceError& e) {
    EXPECT_TRUE(mentions(e, "sum to 1"));
    EXPECT_TRUE(mentions(e, "negative"));
    EXPECT_TRUE(mentions(e, "overlap"));
  }
}

TEST(ValidateInstance, SingleAgentRejected) {
  RawInstance raw{{1.0}, {{"solo", {{0, 1, {1}}}}}};
  EXPECT_THROW(validate_instance(raw), InstanceError);
}

TEST(ValidateInstance, PiecesMustCoverUnitInterval) {
  auto raw = early_peak_raw();
  raw.agents[0].pieces = {{0.1, 1, {1}}};
  EXPECT_THROW(validate_instance(raw), InstanceError);
  raw.agents[0].pieces = {{0, 0.9, {1}}};
  EXPECT_THROW(validate_instance(raw), InstanceError);
}

TEST(Instance, NormalizedRescalesMasses) {
  auto raw = early_peak_raw();
  raw.agents[0].pieces = {{0, 1, {2}}};
  const auto inst = validate_instance(raw);
  EXPECT_FALSE(inst.is_normalized());
  const auto norm = inst.normalized();
  EXPECT_TRUE(norm.is_normalized());
  EXPECT_DOUBLE_EQ(norm.density(0)(0.3), 1.0);
}

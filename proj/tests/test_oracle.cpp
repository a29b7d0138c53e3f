#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fairbound/bound_core.hpp"
#include "fairbound/oracle.hpp"
#include "support/oracles.hpp"

using namespace fairbound;

namespace {

Instance peaked() { return validate_instance(fbtest::early_peak_instance()); }

}  // namespace

TEST(Discretize, UniformDensityCells) {
  const Instance inst({DensityFunction::polynomial({1}), DensityFunction::polynomial({0, 2})}, {0.5, 0.5});
  const auto d = discretize(inst, 4);
  ASSERT_EQ(d.cells(), 4u);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(d.masses(0, c), 0.25, 1e-15);
  const auto d2 = discretize(inst, 2);
  EXPECT_NEAR(d2.masses(1, 0), 0.25, 1e-15);
  EXPECT_NEAR(d2.masses(1, 1), 0.75, 1e-15);
}

TEST(Discretize, CellMassesSumToTotal) {
  const auto raw = fbtest::early_peak_instance();
  const auto d = discretize(validate_instance(raw), 100);
  for (std::size_t i = 0; i < 3; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < d.cells(); ++c) s += d.masses(i, c);
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  EXPECT_NEAR(d.masses(2, 17), fbtest::raw_integral(raw.agents[2], d.knots[17], d.knots[18]), 1e-13);
}

TEST(Discretize, PieceEndpointsBecomeKnots) {
  RawInstance raw{{0.5, 0.5}, {{"a", {{0, 0.3, {1}}, {0.3, 1, {2}}}}, {"b", {{0, 1, {1}}}}}};
  const auto d = discretize(validate_instance(raw), 4);
  EXPECT_NE(std::find(d.knots.begin(), d.knots.end(), 0.3), d.knots.end());
  EXPECT_EQ(d.cells(), 5u);
}

TEST(Discretize, TooFewCellsThrows) {
  EXPECT_THROW(discretize(peaked(), 2), std::invalid_argument);
}

TEST(OracleValue, IdenticalMeasuresGiveOne) {
  const auto f = DensityFunction::polynomial({1});
  const Instance inst({f, f, f}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_NEAR(oracle_value(discretize(inst, 30)).value, 1.0, 1e-9);
}

TEST(OracleValue, TwoAgentMatchesBruteForce) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 8; ++trial) {
    const auto raw = fbtest::random_instance(gen, 2);
    const auto d = discretize(validate_instance(raw), 200);
    const double v = fbtest::brute_two_agent_value(raw);
    const auto res = oracle_value(d);
    // The discretized optimum is achievable, so it cannot exceed v.
    EXPECT_LE(res.value, v + 1e-9) << "trial " << trial;
    EXPECT_GE(res.value, v - resolution_slack(d)) << "trial " << trial;
  }
}

TEST(OracleValue, TwoLinearExact) {
  // Agent 1 takes [0, x], agent 2 [x, 1]: x / 0.5 = (1 - x^2) / 0.5 at the golden cut.
  const Instance inst({DensityFunction::polynomial({1}), DensityFunction::polynomial({0, 2})}, {0.5, 0.5});
  const auto d = discretize(inst, 400);
  const double v = std::sqrt(5.0) - 1.0;
  const double got = oracle_value(d).value;
  EXPECT_LE(got, v + 1e-9);
  EXPECT_GE(got, v - resolution_slack(d));
}

TEST(OracleValue, EarlyPeakWithinKnownEnclosure) {
  const auto d = discretize(peaked(), 800);
  const auto res = oracle_value(d);
  EXPECT_GE(res.value, 1.4792 - resolution_slack(d));
  EXPECT_LE(res.value, 1.4898);
  EXPECT_LE(res.max_violation, 1e-9);
}

TEST(OracleValue, DualCertificate) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 5; ++trial) {
    const auto inst = validate_instance(fbtest::random_instance(gen, 3));
    const auto d = discretize(inst, 60);
    const auto res = oracle_value(d);
    double la = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_GE(res.duals[i], -1e-12);
      la += res.duals[i] * d.claims[i];
    }
    EXPECT_GE(la, 1.0 - 1e-9);
    EXPECT_NEAR(res.dual_value, res.value, 1e-8 * res.value);
    EXPECT_LE(res.max_violation, 1e-9);
  }
}

TEST(OracleValue, SandwichedByContinuousBounds) {
  const auto inst = peaked();
  const auto d = discretize(inst, 400);
  const double v = oracle_value(d).value;
  const auto legut = legut_bounds(inst, compute_evv(inst, WeightVector::uniform(3)), inst.claims());
  EXPECT_LE(*legut.lower, v + resolution_slack(d));
  EXPECT_GE(legut.upper, v - 1e-9);
}

TEST(OracleMaxsum, CornerTakesEverything) {
  const auto inst = peaked();
  const auto d = discretize(inst, 50);
  EXPECT_NEAR(oracle_maxsum(d, WeightVector::corner(3, 1)).value, 1.0, 1e-12);
}

TEST(OracleMaxsum, ApproachesContinuousMaxsum) {
  const auto inst = peaked();
  const auto d = discretize(inst, 2000);
  for (const auto& b : {WeightVector::uniform(3), WeightVector({0.3, 0.6, 0.1}), WeightVector({0.4, 0.3, 0.3})}) {
    const double cont = maxsum_value(compute_evv(inst, b));
    const double disc = oracle_maxsum(d, b).value;
    // Cell-wise assignment can only lose against the pointwise argmax.
    EXPECT_LE(disc, cont + 1e-12);
    EXPECT_GE(disc, cont - 1e-4);
  }
  EXPECT_NEAR(oracle_maxsum(d, WeightVector::uniform(3)).value, 0.5532, 2e-4);
  EXPECT_NEAR(oracle_maxsum(d, WeightVector({0.3, 0.6, 0.1})).value, 0.6375, 2e-4);
}

TEST(OracleMaxsum, RejectsWrongLength) {
  EXPECT_THROW(oracle_maxsum(discretize(peaked(), 10), WeightVector::uniform(2)), std::invalid_argument);
}

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fairbound/bound_core.hpp"
#include "fairbound/evv_engine.hpp"
#include "support/oracles.hpp"

using namespace fairbound;

namespace {

Instance peaked() { return validate_instance(fbtest::early_peak_instance()); }

const std::vector<double> kThirds{1.0 / 3, 1.0 / 3, 1.0 / 3};

// Value vector with a placeholder weight; only u matters for the cone.
EvvRecord rec(std::vector<double> u) {
  const auto beta = WeightVector::uniform(u.size());
  return EvvRecord::from_values(beta, std::move(u));
}

EvvBasis basis_of(std::vector<std::vector<double>> cols) {
  std::vector<EvvRecord> e;
  for (auto& c : cols) e.push_back(rec(std::move(c)));
  auto b = EvvBasis::make(std::move(e));
  if (!b) throw std::runtime_error("test basis is singular");
  return *b;
}

}  // namespace

TEST(SelectBasisRows, IdentityKeepsAllRows) {
  const Matrix I{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  EXPECT_EQ(select_basis_rows(I), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(SelectBasisRows, DependentColumnsRejected) {
  const auto U = Matrix::from_columns({{1, 0, 0}, {2, 0, 0}});
  EXPECT_FALSE(select_basis_rows(U).has_value());
  EXPECT_FALSE(EvvBasis::make({rec({1, 0, 0}), rec({2, 0, 0})}).has_value());
}

TEST(SelectBasisRows, TallMatrixPicksNonsingularRows) {
  const auto U = Matrix::from_columns({{0, 0.2, 0.9}, {0.1, 0.8, 0.1}});
  const auto rows = select_basis_rows(U);
  ASSERT_TRUE(rows);
  ASSERT_EQ(rows->size(), 2u);
  EXPECT_GT(std::abs(determinant(U.select_rows(*rows))), 0.1);
}

TEST(ConeMembership, SingleProportionalVectorIsInterior) {
  const auto b = basis_of({{1.4 / 3, 1.4 / 3, 1.4 / 3}});
  const auto rep = cone_membership(b, kThirds);
  EXPECT_EQ(rep.status, ConeStatus::interior);
  EXPECT_TRUE(rep.in_span);
  EXPECT_NEAR(lower_bound(b, kThirds).r_star, 1.4, 1e-12);
}

TEST(ConeMembership, SingleVectorOffTheRayIsOutside) {
  const auto b = basis_of({{0.5, 0.4, 0.3}});
  const auto rep = cone_membership(b, kThirds);
  EXPECT_EQ(rep.status, ConeStatus::outside);
  EXPECT_FALSE(rep.in_span);
  EXPECT_THROW(lower_bound(b, kThirds), NoLowerBound);
}

TEST(ConeMembership, TwoAgentsOutside) {
  const auto b = basis_of({{1, 0}, {0.9, 0.1}});
  const std::vector<double> a{0.5, 0.5};
  EXPECT_EQ(cone_membership(b, a).status, ConeStatus::outside);
  EXPECT_FALSE(fbtest::in_cone({{1, 0}, {0.9, 0.1}}, a));
}

TEST(ConeMembership, AgreesWithEigenOnRandomBases) {
  std::mt19937_64 gen(7);
  int inside = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> cols;
    for (int k = 0; k < 3; ++k) cols.push_back(fbtest::random_simplex(gen, 3));
    const auto alpha = fbtest::random_simplex(gen, 3, 0.3);
    const auto b = basis_of(cols);
    const auto status = cone_membership(b, alpha).status;
    const bool expected = fbtest::in_cone(cols, alpha, 0.0);
    if (status == ConeStatus::boundary) continue;
    EXPECT_EQ(status == ConeStatus::interior, expected) << "trial " << trial;
    inside += expected;
  }
  EXPECT_GT(inside, 10);
}

TEST(LowerBound, ClaimVectorItselfGivesOne) {
  const auto b = basis_of({{1.0 / 3, 1.0 / 3, 1.0 / 3}});
  EXPECT_NEAR(lower_bound(b, kThirds).r_star, 1.0, 1e-12);
}

TEST(LowerBound, RefinedSupportingBasis) {
  const std::vector<std::vector<double>> cols{
      {0.5144, 0.5663, 0.3447}, {0.4858, 0.5462, 0.4410}, {0.4816, 0.3910, 0.6551}};
  const auto sol = lower_bound(basis_of(cols), kThirds);
  const auto t = fbtest::solve_coefficients(cols, kThirds);
  EXPECT_NEAR(sol.r_star, 1.0 / (t[0] + t[1] + t[2]), 1e-12);
  EXPECT_NEAR(sol.r_star, 1.4792, 1e-4);
  EXPECT_EQ(sol.status, ConeStatus::interior);
  double tsum = 0.0;
  for (double ti : sol.t) {
    EXPECT_GT(ti, 0.0);
    tsum += ti;
  }
  EXPECT_NEAR(tsum, 1.0, 1e-12);
}

TEST(LowerBound, MatchesEigenOnRandomInteriorBases) {
  std::mt19937_64 gen(11);
  int checked = 0;
  while (checked < 50) {
    std::vector<std::vector<double>> cols;
    for (int k = 0; k < 4; ++k) cols.push_back(fbtest::random_simplex(gen, 4));
    const auto alpha = fbtest::random_simplex(gen, 4, 0.5);
    if (!fbtest::in_cone(cols, alpha, -1e-6)) continue;
    const auto t = fbtest::solve_coefficients(cols, alpha);
    const double expected = 1.0 / (t[0] + t[1] + t[2] + t[3]);
    EXPECT_NEAR(lower_bound(basis_of(cols), alpha).r_star, expected, 1e-10 * expected);
    ++checked;
  }
}

TEST(UpperBound, ThreeWeightBasisValues) {
  const auto inst = peaked();
  const auto uni = compute_evv(inst, WeightVector::uniform(3));
  EXPECT_NEAR(upper_bound(std::span(&uni, 1), kThirds).value, 1.6594, 5e-4);

  std::vector<EvvRecord> evvs;
  for (const auto& b : {WeightVector({0.4, 0.3, 0.3}), WeightVector({0.3, 0.6, 0.1}), WeightVector::uniform(3)}) {
    evvs.push_back(compute_evv(inst, b));
  }
  const auto ub = upper_bound(evvs, kThirds);
  EXPECT_NEAR(ub.value, 1.5443, 5e-4);
  EXPECT_EQ(ub.argmin, 0u);
}

TEST(UpperBound, ClaimVectorGivesOne) {
  EXPECT_NEAR(hyperplane_ratio(rec({1.0 / 3, 1.0 / 3, 1.0 / 3}), kThirds), 1.0, 1e-15);
}

TEST(UpperBound, NeverIncreasesWhenEvvsAreAdded) {
  const auto inst = peaked();
  std::mt19937_64 gen(3);
  std::vector<EvvRecord> evvs{compute_evv(inst, WeightVector::uniform(3))};
  double prev = upper_bound(evvs, kThirds).value;
  for (int k = 0; k < 20; ++k) {
    evvs.push_back(compute_evv(inst, WeightVector(fbtest::random_simplex(gen, 3))));
    const double cur = upper_bound(evvs, kThirds).value;
    EXPECT_LE(cur, prev);
    prev = cur;
  }
}

TEST(ConeBounds, ThreeWeightBasisIsOutsideTheCone) {
  // These three EVVs do not contain alpha in their cone:
  // U t = alpha has a negative coefficient, so no lower bound is certified.
  const auto inst = peaked();
  std::vector<EvvRecord> evvs;
  for (const auto& b : {WeightVector({0.4, 0.3, 0.3}), WeightVector({0.3, 0.6, 0.1}), WeightVector::uniform(3)}) {
    evvs.push_back(compute_evv(inst, b));
  }
  const auto t = fbtest::solve_coefficients({evvs[0].u, evvs[1].u, evvs[2].u}, kThirds);
  EXPECT_LT(*std::min_element(t.begin(), t.end()), 0.0);
  const auto res = cone_bounds(evvs, kThirds);
  EXPECT_EQ(res.cone_status, ConeStatus::outside);
  EXPECT_FALSE(res.lower.has_value());
  EXPECT_NEAR(res.upper, 1.5443, 5e-4);
}

TEST(ConeBounds, BoundaryColumnIsDiscarded) {
  // alpha = 0.5 (1, 1) + 0 (1, 0): the second column carries no weight.
  const std::vector<double> a{0.5, 0.5};
  const auto b = basis_of({{1, 1}, {1, 0}});
  EXPECT_EQ(cone_membership(b, a).status, ConeStatus::boundary);
  const auto reduced = discard_zero_weight(b, a);
  ASSERT_TRUE(reduced);
  EXPECT_EQ(reduced->m(), 1u);

  const auto res = cone_bounds(std::vector<EvvRecord>{rec({1, 1}), rec({1, 0})}, a);
  ASSERT_TRUE(res.lower);
  EXPECT_NEAR(*res.lower, 2.0, 1e-12);
  EXPECT_EQ(res.cone_status, ConeStatus::boundary);
  EXPECT_EQ(res.basis.size(), 1u);
}

TEST(ConeBounds, SandwichTwoAgentValue) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 15; ++trial) {
    const auto raw = fbtest::random_instance(gen, 2);
    const auto inst = validate_instance(raw);
    const double v = fbtest::brute_two_agent_value(raw);
    std::vector<WeightVector> betas{WeightVector::uniform(2)};
    for (int k = 0; k < 6; ++k) betas.emplace_back(fbtest::random_simplex(gen, 2));
    const auto res = cone_bounds(compute_evvs(inst, betas), inst.claims());
    EXPECT_GE(res.upper, v - 1e-6) << "trial " << trial;
    if (res.lower) {
      EXPECT_LE(*res.lower, v + 1e-6) << "trial " << trial;
    }
    const auto single = single_evv_bounds(inst, compute_evv(inst, WeightVector::uniform(2)), inst.claims());
    EXPECT_LE(*single.lower, v + 1e-6);
    EXPECT_GE(single.upper, v - 1e-6);
  }
}

TEST(SingleEvvBounds, NonNormalizedClosedForm) {
  // masses (2, 1, 1), u = (1, 0.5, 0.5): basis (u, e2, e3) gives r = 1.5.
  const std::vector<double> masses{2, 1, 1};
  const auto r = rec({1, 0.5, 0.5});
  const auto res = single_evv_bounds(r, kThirds, masses);
  const auto t = fbtest::solve_coefficients({{1, 0.5, 0.5}, {0, 1, 0}, {0, 0, 1}}, kThirds);
  ASSERT_TRUE(res.lower);
  EXPECT_NEAR(*res.lower, 1.0 / (t[0] + t[1] + t[2]), 1e-12);
  EXPECT_NEAR(*res.lower, 1.5, 1e-12);
  EXPECT_NEAR(res.upper, 2.0 / 3 / (1.0 / 3), 1e-12);
}

TEST(SingleEvvBounds, MatchesLegutOnProbabilityMeasures) {
  const auto inst = peaked();
  const auto uni = compute_evv(inst, WeightVector::uniform(3));
  const auto s = single_evv_bounds(inst, uni, kThirds);
  const auto l = legut_bounds(inst, uni, kThirds);
  EXPECT_NEAR(*s.lower, *l.lower, 1e-12);
  EXPECT_NEAR(s.upper, l.upper, 1e-12);
}

TEST(LegutBounds, TwoAgentClosedForm) {
  const std::vector<double> a{0.5, 0.5};
  const auto res = legut_bounds(rec({0.3, 0.9}), a, std::vector<double>{1, 1});
  EXPECT_NEAR(*res.lower, 1.125, 1e-12);
  EXPECT_NEAR(res.upper, 1.2, 1e-12);
}

TEST(LegutBounds, EarlyPeak) {
  const auto inst = peaked();
  const auto res = legut_bounds(inst, compute_evv(inst, WeightVector::uniform(3)), kThirds);
  EXPECT_NEAR(*res.lower, 1.3437, 5e-4);
  EXPECT_NEAR(res.upper, 1.6594, 5e-4);
}

TEST(LegutBounds, IdenticalMeasuresAreTight) {
  const auto f = DensityFunction::polynomial({1});
  const Instance inst({f, f, f}, kThirds);
  const auto res = legut_bounds(inst, compute_evv(inst, WeightVector::uniform(3)), kThirds);
  EXPECT_NEAR(*res.lower, 1.0, 1e-12);
  EXPECT_NEAR(res.upper, 1.0, 1e-12);
}

TEST(LegutBounds, RejectsNonNormalizedMeasures) {
  EXPECT_THROW(legut_bounds(rec({1, 0.5, 0.5}), kThirds, std::vector<double>{2, 1, 1}),
               std::invalid_argument);
}

TEST(LegutBounds, RejectsNonUniformWeights) {
  const auto inst = peaked();
  EXPECT_THROW(legut_bounds(inst, compute_evv(inst, WeightVector({0.4, 0.3, 0.3})), kThirds),
               std::invalid_argument);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "llmize/benchmarks.hpp"
#include "test_support.hpp"

namespace llmize {
namespace {

using testing::Gen;

TspInstance square() { return TspInstance{{{0, 0}, {0, 10}, {10, 10}, {10, 0}}, 0}; }

TEST(Convex2d, SpecExamples) {
  EXPECT_NEAR(convex2d(RealVector{{3.0, 0.0}}), 8.1411, 1e-4);
  EXPECT_NEAR(convex2d(RealVector{{3.0, 0.0}}), 8.0 + std::sin(3.0), 1e-12);
  EXPECT_NEAR(convex2d(RealVector{{3.473, 0.0}}), 7.898, 1e-3);
  EXPECT_NEAR(convex2d(RealVector{{-1.0, 0.0}}), testing::convex_reference(-1.0, 0.0) + kConvexPenalty, 1e-6);
  EXPECT_THROW(convex2d(RealVector{{1.0}}), ContractViolation);
}

TEST(Convex2d, MatchesReferenceInsideBox) {
  Gen g(12);
  for (int i = 0; i < 1000; ++i) {
    const double a = g.real(0, 5);
    const double b = g.real(0, 5);
    EXPECT_EQ(convex2d(RealVector{{a, b}}), testing::convex_reference(a, b));
  }
}

TEST(ConvexOracle, AgreesWithGoldenSection) {
  const auto grid = convex_grid_oracle();
  const auto line = testing::convex_line_minimum();
  EXPECT_NEAR(grid.value, 7.898, 1e-3);
  EXPECT_NEAR(grid.x1, 3.473, 1e-3);
  EXPECT_NEAR(grid.x2, 0.0, 1e-9);
  EXPECT_NEAR(grid.value, line.value, 1e-6);
  EXPECT_GE(grid.value, line.value - 1e-12);
}

TEST(Lp3, SpecExamples) {
  EXPECT_EQ(lp3(RealVector{{0, 0, 0}}), 0.0);
  EXPECT_NEAR(lp3(RealVector{{1.08, 2.8, 4.44}}), 41.08, 1e-2);
  EXPECT_NEAR(lp3(RealVector{{10, 10, 10}}), 130.0 - kLpPenalty, 1e-6);
  EXPECT_NEAR(lp3(RealVector{{-0.1, 0, 0}}), -0.3 - kLpPenalty, 1e-6);
}

TEST(Lp3, FeasibilityMatchesReference) {
  Gen g(13);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> x{g.real(-1, 8), g.real(-1, 8), g.real(-1, 8)};
    const double z = 3 * x[0] + 4 * x[1] + 6 * x[2];
    const double expected = testing::lp_feasible_reference(x, 0.0) ? z : z - kLpPenalty;
    EXPECT_NEAR(lp3(RealVector{x}), expected, 1e-9);
  }
}

TEST(LpOracle, OptimumCertifiedByDuality) {
  const auto vertex = lp_vertex_oracle();
  ASSERT_EQ(vertex.x.size(), 3U);
  EXPECT_NEAR(vertex.value, 41.08, 1e-2);
  EXPECT_NEAR(vertex.x[0], 1.08, 1e-9);
  EXPECT_NEAR(vertex.x[1], 2.8, 1e-9);
  EXPECT_NEAR(vertex.x[2], 4.44, 1e-9);
  EXPECT_TRUE(testing::lp_feasible_reference(vertex.x));

  const auto cert = testing::lp_dual_certificate();
  for (double y : cert.y) EXPECT_GE(y, 0.0);
  EXPECT_NEAR(cert.bound, vertex.value, 1e-9);
}

TEST(LpOracle, NoRandomFeasiblePointBeatsIt) {
  const double best = lp_vertex_oracle().value;
  Gen g(14);
  for (int i = 0; i < 20000; ++i) {
    std::vector<double> x{g.real(0, 8), g.real(0, 8), g.real(0, 7)};
    if (!testing::lp_feasible_reference(x, 0.0)) continue;
    EXPECT_LE(lp3(RealVector{x}), best + 1e-9);
  }
}

TEST(Tsp, GenerateIsDeterministicAndInRange) {
  const auto a = tsp_generate(10, 5);
  const auto b = tsp_generate(10, 5);
  ASSERT_EQ(a.n(), 10U);
  for (std::size_t i = 0; i < a.n(); ++i) {
    EXPECT_EQ(a.cities[i].x, b.cities[i].x);
    EXPECT_EQ(a.cities[i].y, b.cities[i].y);
    EXPECT_GE(a.cities[i].x, 0.0);
    EXPECT_LE(a.cities[i].y, 100.0);
  }
  EXPECT_NE(tsp_generate(10, 6).cities[0].x, a.cities[0].x);
}

TEST(Tsp, SquareLengths) {
  EXPECT_EQ(tsp_length(square(), Permutation{{0, 1, 2, 3}}), 40.0);
  EXPECT_NEAR(tsp_length(square(), Permutation{{0, 2, 1, 3}}), 20.0 + 20.0 * std::sqrt(2.0), 1e-12);
  EXPECT_EQ(tsp_bruteforce(square()).length, 40.0);
}

TEST(Tsp, InvalidRouteScoresPenalty) {
  EXPECT_EQ(tsp_length(square(), Permutation{{0, 1, 1, 3}}), kTspInvalidRoute);
  EXPECT_EQ(tsp_length(square(), Permutation{{0, 1, 2}}), kTspInvalidRoute);
}

TEST(Tsp, RotationAndReversalInvariance) {
  Gen g(15);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(g.between(2, 12));
    const auto inst = tsp_generate(n, g.bits());
    auto order = g.permutation(n);
    const double base = tsp_length(inst, Permutation{order});
    EXPECT_NEAR(base, testing::tour_length_reference(inst, order), 1e-9);
    auto rotated = order;
    std::rotate(rotated.begin(), rotated.begin() + static_cast<std::ptrdiff_t>(g.between(0, static_cast<std::int64_t>(n) - 1)),
                rotated.end());
    EXPECT_NEAR(tsp_length(inst, Permutation{rotated}), base, 1e-9);
    std::reverse(rotated.begin(), rotated.end());
    EXPECT_NEAR(tsp_length(inst, Permutation{rotated}), base, 1e-9);
  }
}

TEST(Tsp, TwoCitiesIsOutAndBack) {
  const auto inst = tsp_generate(2, 3);
  const double d = std::hypot(inst.cities[0].x - inst.cities[1].x, inst.cities[0].y - inst.cities[1].y);
  EXPECT_NEAR(tsp_bruteforce(inst).length, 2 * d, 1e-12);
}

TEST(Tsp, TriangleHasOneTour) {
  const auto inst = tsp_generate(3, 8);
  const double l = tsp_length(inst, Permutation{{0, 1, 2}});
  EXPECT_NEAR(tsp_length(inst, Permutation{{0, 2, 1}}), l, 1e-12);
  EXPECT_NEAR(tsp_bruteforce(inst).length, l, 1e-12);
}

TEST(Tsp, BruteForceMatchesPlainEnumeration) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = tsp_generate(static_cast<std::size_t>(4 + seed % 4), seed);
    const auto bf = tsp_bruteforce(inst);
    EXPECT_NEAR(bf.length, testing::tsp_exhaustive_reference(inst), 1e-9);
    EXPECT_NEAR(tsp_length(inst, bf.route), bf.length, 1e-12);
    EXPECT_EQ(bf.route.order.front(), 0);
  }
}

TEST(Tsp, FrozenSevenCityOptimum) {
  const auto inst = tsp_generate(7, 42);
  EXPECT_NEAR(testing::tsp_exhaustive_reference(inst), testing::kTsp7Seed42Optimum, 1e-9);
  EXPECT_NEAR(tsp_bruteforce(inst).length, testing::kTsp7Seed42Optimum, 1e-9);
}

TEST(Tsp, BruteForceRefusesLargeInstances) {
  EXPECT_THROW(tsp_bruteforce(tsp_generate(11, 1)), InstanceTooLarge);
}

TEST(SeedSamples, GridIncludesCorners) {
  const auto s = seed_samples(uniform_box(2, 0, 5), 9, 1, SeedStyle::Grid);
  ASSERT_EQ(s.size(), 9U);
  auto has = [&](double a, double b) {
    return std::any_of(s.begin(), s.end(), [&](const SolutionValue& v) {
      return std::get<RealVector>(v).values == std::vector<double>{a, b};
    });
  };
  EXPECT_TRUE(has(0, 0));
  EXPECT_TRUE(has(5, 5));
  EXPECT_TRUE(has(2.5, 2.5));
}

TEST(SeedSamples, PermutationsAreValidAndReplayable) {
  const auto a = seed_samples(PermutationSchema{10}, 5, 99, SeedStyle::UniformRandom);
  const auto b = seed_samples(PermutationSchema{10}, 5, 99, SeedStyle::UniformRandom);
  ASSERT_EQ(a.size(), 5U);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(is_bijection(std::get<Permutation>(a[i]).order, 10));
    EXPECT_TRUE(a[i] == b[i]);
  }
}

TEST(SeedSamples, KeyedScalarsStayInBounds) {
  const KeyedScalarsSchema schema{{"u", "p", "eta"}, {{32, 512}, {0, 0.6}, {1e-4, 1e-1}}};
  for (const auto& v : seed_samples(schema, 200, 4, SeedStyle::UniformRandom)) {
    const auto& pairs = std::get<KeyedScalars>(v).pairs;
    ASSERT_EQ(pairs.size(), 3U);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(pairs[i].first, schema.keys[i]);
      EXPECT_GE(pairs[i].second, schema.bounds[i].lower);
      EXPECT_LE(pairs[i].second, schema.bounds[i].upper);
    }
  }
}

TEST(SeedSamples, GridNeedsRealVectors) {
  EXPECT_THROW(seed_samples(PermutationSchema{4}, 4, 1, SeedStyle::Grid), ContractViolation);
}

TEST(Registry, KnownNamesAndUnknownError) {
  EXPECT_EQ(benchmark_names(), (std::vector<std::string>{"convex2d", "lp3", "tsp"}));
  try {
    make_benchmark("nosuch");
    FAIL();
  } catch (const std::out_of_range& e) {
    const std::string msg = e.what();
    for (const auto& n : benchmark_names()) EXPECT_NE(msg.find(n), std::string::npos);
  }
  const auto t = make_benchmark("tsp", {7, 42, 1});
  ASSERT_TRUE(t.target);
  EXPECT_NEAR(*t.target, testing::kTsp7Seed42Optimum, 1e-6);
  EXPECT_FALSE(make_benchmark("tsp", {12, 42, 1}).target);
}

}  // namespace
}  // namespace llmize

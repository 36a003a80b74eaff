#include "emd/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "emd/error.hpp"
#include "test_oracles.hpp"

namespace emd {
namespace {

using testing::Point2;

AtomicMeasure dirac(double x, double y) {
  return AtomicMeasure({{{x, y}, 1}}, 1);
}

TEST(GroundDistanceTest, Examples) {
  const double origin[] = {0.0, 0.0};
  const double target[] = {0.4, 0.4};
  EXPECT_DOUBLE_EQ(ground_distance(origin, target, Metric::L1), 0.8);
  EXPECT_NEAR(ground_distance(origin, target, Metric::L2), 0.565685424949,
              1e-12);
  const double a[] = {1.0, 2.0, 3.0};
  EXPECT_EQ(ground_distance(a, a, Metric::L1), 0.0);
  EXPECT_EQ(ground_distance(a, a, Metric::L2), 0.0);
  EXPECT_THROW(ground_distance(a, origin, Metric::L1), IncompatibleFields);
}

TEST(AtomicMeasureTest, MergesDuplicatesAndValidates) {
  const AtomicMeasure mu({{{0.0, 0.0}, 1}, {{1.0, 0.0}, 2}, {{0.0, 0.0}, 1}}, 4);
  ASSERT_EQ(mu.atoms().size(), 2u);
  EXPECT_EQ(mu.atoms()[0].units + mu.atoms()[1].units, 4);
  EXPECT_THROW(AtomicMeasure({{{0.0}, 1}}, 2), InvalidMeasure);
  EXPECT_THROW(AtomicMeasure({{{0.0}, 0}, {{1.0}, 2}}, 2), InvalidMeasure);
  EXPECT_THROW(AtomicMeasure({{{0.0}, 1}, {{1.0, 1.0}, 1}}, 2), InvalidMeasure);
  EXPECT_THROW(AtomicMeasure({{{NAN}, 1}}, 1), InvalidMeasure);
}

TEST(ExactEmdTest, DiracPair) {
  EXPECT_NEAR(exact_emd(dirac(0, 0), dirac(0.4, 0.4), Metric::L1), 0.8, 1e-12);
  EXPECT_NEAR(exact_emd(dirac(0, 0), dirac(0.4, 0.4), Metric::L2),
              0.4 * std::sqrt(2.0), 1e-12);
}

TEST(ExactEmdTest, SplitTarget) {
  const AtomicMeasure source({{{0.0, 0.0}, 2}}, 2);
  const AtomicMeasure split({{{0.4, 0.4}, 1}, {{-0.4, -0.4}, 1}}, 2);
  EXPECT_NEAR(exact_emd(source, split, Metric::L1), 0.8, 1e-12);
  EXPECT_NEAR(exact_emd(source, split, Metric::L2), 0.4 * std::sqrt(2.0), 1e-12);
}

TEST(ExactEmdTest, Errors) {
  const AtomicMeasure half({{{0.0}, 1}, {{1.0}, 1}}, 2);
  EXPECT_THROW(exact_emd(AtomicMeasure({{{0.0}, 1}}, 1), half, Metric::L1),
               InvalidMeasure);
  const AtomicMeasure big({{{0.0}, 257}}, 257);
  EXPECT_THROW(exact_emd(big, big, Metric::L1), ConfigurationError);
}

// Expands a random measure on a small grid into unit atoms.
struct RandomUnits {
  std::vector<Atom> atoms;
  std::vector<Point2> units;
};

RandomUnits random_units(std::mt19937_64& rng, int k, int side) {
  std::uniform_int_distribution<int> cell(0, side - 1);
  RandomUnits out;
  for (int u = 0; u < k; ++u) {
    const double x = cell(rng), y = cell(rng);
    out.atoms.push_back({{x, y}, 1});
    out.units.push_back({x, y});
  }
  return out;
}

TEST(ExactEmdTest, FourAtomsOnThreeByThreeMatchesEnumeration) {
  // Masses in {1/4, 2/4}: atoms with two units exercise the merge path.
  std::mt19937_64 rng(0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_units(rng, 4, 3);
    auto b = random_units(rng, 3, 3);
    b.atoms.push_back(b.atoms.front());
    b.units.push_back(b.units.front());
    for (Metric metric : {Metric::L1, Metric::L2}) {
      const auto dist = metric == Metric::L1 ? testing::l1 : testing::l2;
      EXPECT_NEAR(exact_emd(AtomicMeasure(a.atoms, 4), AtomicMeasure(b.atoms, 4),
                            metric),
                  testing::brute_force_emd(a.units, b.units, dist), 1e-12);
    }
  }
}

TEST(ExactEmdTest, MatchesEnumerationUpToEightUnits) {
  std::mt19937_64 rng(1);
  for (int k = 1; k <= 8; ++k) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto a = random_units(rng, k, 5);
      const auto b = random_units(rng, k, 5);
      EXPECT_NEAR(exact_emd(AtomicMeasure(a.atoms, k), AtomicMeasure(b.atoms, k),
                            Metric::L2),
                  testing::brute_force_emd(a.units, b.units, testing::l2), 1e-12);
    }
  }
}

TEST(SolveAssignmentTest, MatchesEnumerationOnRandomMatrices) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 10.0);
  for (std::size_t n = 1; n <= 7; ++n) {
    std::vector<double> cost(n * n);
    for (double& c : cost) c = u(rng);
    std::vector<std::size_t> perm(n), assignment;
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
      double total = 0.0;
      for (std::size_t r = 0; r < n; ++r) total += cost[r * n + perm[r]];
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double got = solve_assignment(cost, n, assignment);
    EXPECT_NEAR(got, best, 1e-12);
    std::vector<bool> seen(n, false);
    for (std::size_t c : assignment) {
      ASSERT_LT(c, n);
      EXPECT_FALSE(seen[c]);
      seen[c] = true;
    }
  }
}

TEST(ExactEmdProperties, IdentitySymmetryTriangle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int k = 6;
    const AtomicMeasure a(random_units(rng, k, 4).atoms, k);
    const AtomicMeasure b(random_units(rng, k, 4).atoms, k);
    const AtomicMeasure c(random_units(rng, k, 4).atoms, k);
    for (Metric metric : {Metric::L1, Metric::L2}) {
      EXPECT_NEAR(exact_emd(a, a, metric), 0.0, 1e-12);
      EXPECT_NEAR(exact_emd(a, b, metric), exact_emd(b, a, metric), 1e-12);
      EXPECT_LE(exact_emd(a, c, metric),
                exact_emd(a, b, metric) + exact_emd(b, c, metric) + 1e-12);
    }
  }
}

TEST(MeasureFromDensityTest, Examples) {
  const LatticeGrid two({2}, 1.0, {0.0});
  const auto single = measure_from_density(DensityField(two, {1.0, 0.0}), 1);
  ASSERT_EQ(single.atoms().size(), 1u);
  EXPECT_EQ(single.atoms()[0].units, 1);
  EXPECT_EQ(single.atoms()[0].position, std::vector<double>{0.0});

  const LatticeGrid four({4}, 1.0, {0.0});
  const auto pair =
      measure_from_density(DensityField(four, {0.5, 0.0, 0.0, 0.5}), 2);
  EXPECT_EQ(pair.atoms().size(), 2u);

  EXPECT_THROW(measure_from_density(DensityField(two, {1.0 / 3, 2.0 / 3}), 2),
               RationalityError);
}

}  // namespace
}  // namespace emd

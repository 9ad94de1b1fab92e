#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "selseg/otsu.hpp"
#include "selseg/rng.hpp"

using namespace selseg;

namespace {

Histogram random_histogram(Rng& rng) {
  Histogram h{};
  // Mix sparse spiky histograms with dense ones.
  double const occupancy = rng.uniform01() < 0.5 ? 0.03 + 0.1 * rng.uniform01() : 1.0;
  for (int b = 0; b < 256; ++b) {
    if (rng.uniform01() < occupancy) h[b] = static_cast<double>(rng.uniform_index(1000));
  }
  h[rng.uniform_index(256)] += 1.0;
  h[rng.uniform_index(256)] += 1.0;
  h[rng.uniform_index(256)] += 1.0;
  return h;
}

int occupied(Histogram const& h) {
  int n = 0;
  for (double c : h) n += c > 0.0;
  return n;
}

}  // namespace

TEST(Otsu, TwoDeltaPeaks) {
  Histogram h{};
  h[histogram_bin(0.2)] = 50;
  h[histogram_bin(0.8)] = 70;
  auto const t = otsu_thresholds(h, 2);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_GT(t[0], 0.2);
  EXPECT_LT(t[0], 0.8);
  EXPECT_NEAR(oracle::within_class_variance(h, t), oracle::exhaustive_min_variance(h, 2), 1e-12);
}

TEST(Otsu, ThreeDeltaPeaks) {
  Histogram h{};
  for (double v : {0.1, 0.5, 0.9}) h[histogram_bin(v)] = 100;
  auto const t = otsu_thresholds(h);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_GT(t[0], 0.1);
  EXPECT_LT(t[0], 0.5);
  EXPECT_GT(t[1], 0.5);
  EXPECT_LT(t[1], 0.9);
  EXPECT_NEAR(oracle::within_class_variance(h, t), 0.0, 1e-12);
  EXPECT_NEAR(oracle::within_class_variance(h, t), oracle::exhaustive_min_variance(h, 3), 1e-12);
}

TEST(Otsu, ConstantImageHasNoSeparableClasses) {
  GrayImage const z(ScalarField(8, 8, 0.4));
  EXPECT_THROW(otsu_thresholds(z), InputError);
  EXPECT_THROW(otsu_thresholds(Histogram{}, 2), InputError);
  Histogram h{};
  h[3] = 1;
  h[9] = 1;
  EXPECT_THROW(otsu_thresholds(h, 1), InputError);
}

TEST(Otsu, FewerOccupiedBinsThanClassesSplitsEveryGap) {
  Histogram h{};
  h[10] = 5;
  h[200] = 5;
  auto const t = otsu_thresholds(h, 3);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t[0], 105.0 / 255.0);
}

TEST(Otsu, ImageOverloadUsesRoundedBins) {
  ScalarField f(4, 4, 0.0);
  for (int i = 8; i < 16; ++i) f[i] = 1.0;
  auto const t = otsu_thresholds(GrayImage(f), 2);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t[0], 0.5);
}

TEST(Otsu, MatchesExhaustiveSearchOnRandomHistograms) {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    Histogram const h = random_histogram(rng);
    int const classes = trial % 2 == 0 ? 2 : 3;
    auto const t = otsu_thresholds(h, classes);
    ASSERT_TRUE(std::is_sorted(t.begin(), t.end()));
    ASSERT_EQ(static_cast<int>(t.size()), std::min(classes, occupied(h)) - 1);
    double const got = oracle::within_class_variance(h, t);
    double const ref = oracle::exhaustive_min_variance(h, classes);
    worst = std::max(worst, std::abs(got - ref));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(SelectGammas, DocumentedCases) {
  std::vector<double> const t{0.3, 0.7};
  auto near = [](GammaPair g, double a, double b) {
    return std::abs(g.gamma1 - a) < 1e-15 && std::abs(g.gamma2 - b) < 1e-15;
  };
  EXPECT_TRUE(near(select_gammas(0.5, t), 0.2, 0.2));
  EXPECT_TRUE(near(select_gammas(0.2, t), 0.2, 0.1));
  EXPECT_TRUE(near(select_gammas(0.8, t), 0.1, 0.2));
}

TEST(SelectGammas, DegenerateWidthsAreWidened) {
  std::vector<double> const t{0.3, 0.7};
  GammaPair const at = select_gammas(0.3, t);
  EXPECT_EQ(at.gamma1, 0.3);
  EXPECT_EQ(at.gamma2, kMinGamma);
  GammaPair const zero = select_gammas(0.0, t);
  EXPECT_EQ(zero.gamma1, kMinGamma);
  GammaPair const one = select_gammas(1.0, t);
  EXPECT_EQ(one.gamma2, kMinGamma);
}

TEST(SelectGammas, RejectsBadThresholds) {
  EXPECT_THROW(select_gammas(0.5, {}), InputError);
  EXPECT_THROW(select_gammas(0.5, {0.7, 0.3}), InputError);
}

TEST(SelectGammas, ExhaustiveGridObeysCaseDefinitions) {
  std::vector<std::vector<double>> const lists{
      {0.3, 0.7}, {0.5}, {0.1, 0.4, 0.85}, {0.25, 0.26}, {0.0, 1.0}};
  for (auto const& t : lists) {
    for (int k = 0; k <= 100; ++k) {
      double const c1 = k / 100.0;
      double g1 = 0.0, g2 = 0.0;
      int fired = 0;
      if (c1 <= t.front()) {
        g1 = c1;
        g2 = t.front() - c1;
        ++fired;
      }
      if (c1 >= t.back() && fired == 0) {
        g1 = c1 - t.back();
        g2 = 1.0 - c1;
        ++fired;
      }
      if (fired == 0) {
        for (std::size_t i = 1; i < t.size(); ++i) {
          if (t[i - 1] <= c1 && c1 <= t[i]) {
            g1 = c1 - t[i - 1];
            g2 = t[i] - c1;
            ++fired;
            break;
          }
        }
      }
      ASSERT_EQ(fired, 1) << c1;
      ASSERT_GE(g1, 0.0);
      ASSERT_GE(g2, 0.0);
      GammaPair const g = select_gammas(c1, t);
      EXPECT_NEAR(g.gamma1, std::max(g1, kMinGamma), 1e-15) << c1;
      EXPECT_NEAR(g.gamma2, std::max(g2, kMinGamma), 1e-15) << c1;
    }
  }
}

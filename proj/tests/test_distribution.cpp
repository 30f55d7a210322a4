#include <cmath>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "support/corpus.hpp"
#include "wchisq/distribution.hpp"
#include "wchisq/oracles.hpp"

using namespace wchisq;

namespace {

const WeightedSumSpec kHypo({{2.0, 2}, {1.0, 2}});
const WeightedSumSpec kLaplace({{1.0, 2}, {-1.0, 2}});

std::vector<WeightedSumSpec> sample_specs() {
  auto specs = wchisq::testing::make_corpus(25, 31);
  specs.push_back(kHypo);
  specs.push_back(kLaplace);
  specs.push_back(WeightedSumSpec({{1.0, 50}, {-0.5, 50}}));
  return specs;
}

}  // namespace

TEST(Components, Examples) {
  const auto hypo = components(decompose(kHypo));
  ASSERT_EQ(hypo.size(), 2u);
  EXPECT_EQ(hypo[0].shape, 1);
  EXPECT_EQ(hypo[0].scale, 4.0);
  EXPECT_EQ(hypo[0].sign, 1);
  EXPECT_EQ(to_double(hypo[0].coefficient), 2.0);
  EXPECT_EQ(hypo[1].scale, 2.0);
  EXPECT_EQ(to_double(hypo[1].coefficient), -1.0);

  const auto lap = components(decompose(kLaplace));
  ASSERT_EQ(lap.size(), 2u);
  EXPECT_EQ(lap[1].sign, -1);
  EXPECT_EQ(lap[1].scale, 2.0);
  EXPECT_EQ(to_double(lap[1].coefficient), 0.5);

  const auto chi4 = components(decompose(WeightedSumSpec({{1.0, 4}})));
  ASSERT_EQ(chi4.size(), 1u);
  EXPECT_EQ(chi4[0].shape, 2);
  EXPECT_EQ(chi4[0].scale, 2.0);
  EXPECT_EQ(to_double(chi4[0].coefficient), 1.0);
}

TEST(Pdf, Examples) {
  for (double x : {-5.0, -0.1}) EXPECT_EQ(pdf(kHypo, x), 0.0);
  EXPECT_NEAR(pdf(kLaplace, 0.8), 0.25 * std::exp(-0.4), 1e-15);
  EXPECT_NEAR(pdf(kLaplace, -0.8), 0.25 * std::exp(-0.4), 1e-15);
  EXPECT_NEAR(pdf(kHypo, 4.0), 0.5 * std::exp(-1.0) - 0.5 * std::exp(-2.0), 1e-15);
}

TEST(Cdf, Examples) {
  EXPECT_NEAR(cdf(kLaplace, 0.0), 0.5, 1e-15);
  EXPECT_NEAR(cdf(kHypo, 4.0), 1 - 2 * std::exp(-1.0) + std::exp(-2.0), 1e-15);
  EXPECT_NEAR(cdf(WeightedSumSpec({{1.0, 2}, {1.0, 2}}), 2.0), 1 - 2 * std::exp(-1.0), 1e-15);
  EXPECT_EQ(cdf(kHypo, 0.0), 0.0);
  EXPECT_EQ(cdf(kHypo, -3.0), 0.0);
  EXPECT_NEAR(cdf(kLaplace, -2.0), 0.5 * std::exp(-1.0), 1e-15);
}

TEST(Cdf, FrozenMixedSignValues) {
  // (1-4t)^-2 (1+2t)^-1 = 2/3 (1-4t)^-2 + 2/9 (1-4t)^-1 + 1/9 (1+2t)^-1
  const WeightedSumSpec spec({{2.0, 4}, {-1.0, 2}});
  const auto e = decompose(spec);
  EXPECT_NEAR(to_double(e.groups[0].coeffs[0]), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(to_double(e.groups[0].coeffs[1]), 2.0 / 9.0, 1e-15);
  EXPECT_NEAR(to_double(e.groups[1].coeffs[0]), 1.0 / 9.0, 1e-15);
  for (double x : {0.5, 3.0, 11.0}) {
    const double y = x / 4.0;
    const double want = 1.0 / 9.0 + 2.0 / 3.0 * (1 - std::exp(-y) * (1 + y)) + 2.0 / 9.0 * (1 - std::exp(-y));
    EXPECT_NEAR(cdf(spec, x), want, 1e-15);
  }
  for (double x : {-0.5, -4.0}) EXPECT_NEAR(cdf(spec, x), std::exp(x / 2.0) / 9.0, 1e-15);
}

TEST(Distribution, ChiSquaredDegeneracy) {
  const WeightedSumSpec ones({{1.0, 4}, {1.0, 10}, {1.0, 2}});
  const Distribution d(ones);
  for (double x = 0.0; x <= 60.0; x += 0.5) EXPECT_NEAR(d.cdf(x), regularized_lower_gamma(8.0, x / 2.0), 1e-10);
}

TEST(Distribution, FundamentalTheorem) {
  for (const auto& spec : sample_specs()) {
    const Distribution d(spec);
    const auto m = d.moments();
    const double h = 1e-5 * m.stddev();
    for (int k = 0; k < 50; ++k) {
      const double x = m.mean + m.stddev() * (-3.0 + 6.0 * k / 49.0) + 0.0137;
      const double f = d.pdf(x);
      const double slope = (d.cdf(x + h) - d.cdf(x - h)) / (2 * h);
      EXPECT_LE(std::abs(slope - f), std::max(1e-6, 1e-4 * f)) << "x = " << x;
    }
  }
}

TEST(Distribution, Monotone) {
  for (const auto& spec : sample_specs()) {
    const Distribution d(spec);
    const auto m = d.moments();
    double prev = -1.0;
    for (int k = 0; k <= 400; ++k) {
      const double F = d.cdf(m.mean + m.stddev() * (-8.0 + 16.0 * k / 400.0));
      EXPECT_GE(F, prev - 1e-9);
      EXPECT_GE(F, -1e-7);
      EXPECT_LE(F, 1 + 1e-7);
      prev = F;
    }
  }
}

// The 12-sigma tails hold at most 1e-6 of the mass for most laws, not all:
// judged against inversion rather than assumed.
TEST(Distribution, TwelveSigmaLimits) {
  for (const auto& spec : sample_specs()) {
    const Distribution d(spec);
    const auto m = d.moments();
    const double lo = m.mean - 12 * m.stddev(), hi = m.mean + 12 * m.stddev();
    const auto inv_lo = cf_inversion_cdf(spec, lo, 1e-10);
    const auto inv_hi = cf_inversion_cdf(spec, hi, 1e-10);
    EXPECT_NEAR(d.cdf(lo), inv_lo.value, 1e-9);
    EXPECT_NEAR(d.cdf(hi), inv_hi.value, 1e-9);
    if (inv_lo.value + inv_lo.error_bound <= 1e-6) EXPECT_LE(d.cdf(lo), 1e-6);
    if (inv_hi.value - inv_hi.error_bound >= 1 - 1e-6) EXPECT_GE(d.cdf(hi), 1 - 1e-6);
  }
}

TEST(Distribution, ExponentialTailExceedsTwelveSigmaBound) {
  // chi2(2): mean 2, sd 2, so P(X > mean + 12 sd) = e^-13 ~ 2.3e-6
  const Distribution d(WeightedSumSpec({{1.0, 2}}));
  EXPECT_NEAR(1 - d.cdf(26.0), std::exp(-13.0), 1e-15);
}

TEST(Distribution, PrecisionTiersAgreeWhereBothAreValid) {
  const WeightedSumSpec spec({{1.3, 6}, {-0.4, 4}, {2.9, 2}});
  const BasicDistribution<wide_real> quad(spec);
  const BasicDistribution<extended_real> ext(spec);
  const BasicDistribution<double> dbl(spec);
  for (double x : {-3.0, -0.2, 0.0, 1.0, 7.5, 20.0}) {
    EXPECT_NEAR(quad.cdf(x), ext.cdf(x), 1e-16);
    EXPECT_NEAR(quad.pdf(x), ext.pdf(x), 1e-16);
    EXPECT_NEAR(dbl.cdf(x), ext.cdf(x), 1e-12);
  }
}

TEST(Distribution, HighOrderUsesExtendedPrecision) {
  const Distribution d(WeightedSumSpec({{1.0, 50}, {0.5, 50}}));
  EXPECT_EQ(d.precision_bits(), 256);
  EXPECT_FALSE(d.ill_conditioned());
  EXPECT_NEAR(d.cdf(0.0), 0.0, 1e-300);
  const double median_ish = d.cdf(d.moments().mean);
  EXPECT_GT(median_ish, 0.45);
  EXPECT_LT(median_ish, 0.6);
}

TEST(Distribution, RawValuesAreNotClamped) {
  // cancellation in double leaves visible noise
  const BasicDistribution<double> d(WeightedSumSpec({{1.0, 40}, {1.05, 40}}));
  EXPECT_TRUE(d.ill_conditioned());
  bool outside = false;
  for (double x = 0.0; x < 3.0; x += 0.01) outside = outside || d.cdf(x) < 0.0 || d.cdf(x) > 1.0;
  EXPECT_TRUE(outside);
}

TEST(EvaluateGrid, Examples) {
  const double zero[] = {0.0};
  const auto t = evaluate_grid(kHypo, zero, false, true);
  EXPECT_FALSE(t.pdf.has_value());
  ASSERT_TRUE(t.cdf.has_value());
  EXPECT_EQ((*t.cdf)[0], 0.0);

  const WeightedSumSpec spec({{1.0, 20}, {-0.5, 10}});
  const auto m = mean_variance(spec);
  std::vector<double> xs;
  for (int i = 0; i <= 40000; ++i) xs.push_back(m.mean - 10 * m.stddev() + 20 * m.stddev() * i / 40000.0);
  const auto wide = evaluate_grid(spec, xs, true, true);
  EXPECT_NEAR(wide.cdf->front(), 0.0, 1e-6);
  EXPECT_NEAR(wide.cdf->back(), 1.0, 1e-6);
  double area = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) area += 0.5 * ((*wide.pdf)[i] + (*wide.pdf)[i - 1]) * (xs[i] - xs[i - 1]);
  EXPECT_NEAR(area, 1.0, 1e-6);
}

TEST(EvaluateGrid, RejectsUnorderedOrNonFiniteGrids) {
  const double repeated[] = {1.0, 1.0};
  const double descending[] = {2.0, 1.0};
  const double nan[] = {0.0, std::nan("")};
  EXPECT_THROW(evaluate_grid(kHypo, repeated, true, true), std::invalid_argument);
  EXPECT_THROW(evaluate_grid(kHypo, descending, true, true), std::invalid_argument);
  EXPECT_THROW(evaluate_grid(kHypo, nan, true, true), std::invalid_argument);
}

TEST(EvaluateGrid, PointsAreIndependentOfEvaluationOrder) {
  const Distribution d(WeightedSumSpec({{2.5, 8}, {-1.2, 6}, {0.7, 4}}));
  std::vector<double> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(-20.0 + 0.25 * i);
  const auto table = evaluate_grid(d, xs, true, true);
  std::vector<double> threaded(xs.size());
  std::vector<std::thread> pool;
  for (int w = 0; w < 4; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = xs.size() - 1 - w; i < xs.size(); i -= 4) threaded[i] = d.cdf(xs[i]);
    });
  }
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_EQ(threaded[i], (*table.cdf)[i]);
}

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "oracles.hpp"
#include "sftr/weights.hpp"

using namespace sftr;

namespace {

SchemeParams params(double alpha, double theta) { return SchemeParams{alpha, theta, 1.0, 1}; }

std::vector<double> table(const WeightTable& w) { return {w.values().begin(), w.values().end()}; }

}  // namespace

TEST(SftrWeights, SqrtCaseLeadingTerms) {
  const auto w = sftr_weights(params(0.5, 0.25), 3);
  ASSERT_EQ(w.size(), 4u);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_DOUBLE_EQ(w[1], -0.5);
  EXPECT_DOUBLE_EQ(w[2], -0.125);
  EXPECT_DOUBLE_EQ(w[3], -0.0625);
}

TEST(SftrWeights, SingleWeight) {
  const auto w = sftr_weights(params(0.5, 0.25), 0);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0], 1.0);
}

TEST(SftrWeights, LeadingWeightClosedForm) {
  const auto w = sftr_weights(params(0.9, 0.5), 5);
  EXPECT_NEAR(w[0], std::pow(1.8 / 1.9, 0.9), 1e-15);
  const auto s = series_weights(params(0.9, 0.5), 5);
  EXPECT_NEAR(s[0], w[0], 1e-15);
  // omega_1 = -alpha (2a/(a+2t))^(a+1)
  EXPECT_NEAR(w[1], -0.9 * std::pow(1.8 / 1.9, 1.9), 1e-15);
}

TEST(SftrWeights, MatchesBinomialProductOracle) {
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (double theta : {0.0, 0.05, 0.2, 0.5}) {
      const auto w = sftr_weights(params(alpha, theta), 1000);
      const auto ref = oracle::shifted_trapezoid_weights(alpha, theta, 1000);
      for (std::size_t k = 0; k <= 1000; ++k)
        ASSERT_NEAR(w[k], ref[k], 1e-12 * std::max(1.0, std::abs(ref[k])))
            << "alpha=" << alpha << " theta=" << theta << " k=" << k;
    }
  }
}

TEST(SftrWeights, AgreesWithSeriesRouteOnGrid) {
  for (int a = 1; a <= 9; ++a) {
    for (int t = 0; t <= 5; ++t) {
      const auto p = params(0.1 * a, 0.1 * t);
      const auto w = sftr_weights(p, 1000);
      const auto s = series_weights(p, 1000);
      for (std::size_t k = 0; k <= 1000; ++k)
        ASSERT_NEAR(w[k], s[k], 1e-12 * std::max(1.0, std::abs(s[k])))
            << "alpha=" << p.alpha << " theta=" << p.theta << " k=" << k;
    }
  }
}

TEST(SftrWeights, ZeroShiftIsFractionalTrapezoid) {
  // [2 (1 - xi) / (1 + xi)]^a
  const double alpha = 0.4;
  const auto w = sftr_weights(params(alpha, 0.0), 200);
  const auto num = oracle::binomial_series(alpha, -1.0L, 200);
  const auto den = oracle::binomial_series(-alpha, 1.0L, 200);
  const auto prod = oracle::convolve(num, den, 200);
  for (std::size_t k = 0; k <= 200; ++k)
    EXPECT_NEAR(w[k], static_cast<double>(std::pow(2.0L, alpha) * prod[k]), 1e-13);
}

TEST(SftrWeights, OrderOneHalfShiftIsBackwardDifference) {
  const auto w = sftr_weights(params(1.0, 0.5), 50);
  EXPECT_EQ(w[0], 1.0);
  EXPECT_EQ(w[1], -1.0);
  for (std::size_t k = 2; k <= 50; ++k) EXPECT_EQ(w[k], 0.0) << k;
}

TEST(SftrWeights, ThreeTermRecursionHolds) {
  const double alpha = 0.35, theta = 0.15;
  const auto w = sftr_weights(params(alpha, theta), 300);
  for (std::size_t k = 2; k <= 300; ++k) {
    const double kk = static_cast<double>(k);
    const double rhs = 2.0 * alpha / (kk * (alpha + 2.0 * theta)) *
                       ((2.0 * theta / alpha * (kk - 1.0) - alpha) * w[k - 1] +
                        (alpha - 2.0 * theta) / (2.0 * alpha) * (kk - 2.0) * w[k - 2]);
    EXPECT_NEAR(w[k], rhs, 1e-15 * std::max(1.0, std::abs(w[k])));
  }
}

TEST(SftrWeights, FiniteOverAdmissibleRange) {
  for (double alpha : {0.01, 0.25, 0.5, 0.75, 0.99, 1.0})
    for (double theta : {0.0, 0.001, 0.25, 0.5})
      for (double x : sftr_weights(params(alpha, theta), 2000).values()) ASSERT_TRUE(std::isfinite(x));
}

TEST(SftrWeights, PartialSumsDecayLikeNegativePowerOfK) {
  // Near xi = 1 the generating function behaves like (1 - xi)^a, so the
  // partial sums behave like K^-a / Gamma(1 - a).
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto w = sftr_weights(params(alpha, 0.2), 10000);
    double s = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= 10000; ++k) {
      s += w[k];
      if (k >= 100) {
        ASSERT_LT(std::abs(s), prev) << "alpha=" << alpha << " k=" << k;
        prev = std::abs(s);
      }
    }
    const double predicted = std::pow(1e4, -alpha) / std::tgamma(1.0 - alpha);
    EXPECT_NEAR(s / predicted, 1.0, 0.01) << alpha;
    if (alpha >= 0.5) EXPECT_LE(std::abs(s), 1e-2) << alpha;
  }
}

TEST(SftrWeights, RejectsInvalidParameters) {
  EXPECT_THROW(sftr_weights(params(0.0, 0.1), 4), std::domain_error);
  EXPECT_THROW(sftr_weights(params(1.2, 0.1), 4), std::domain_error);
  EXPECT_THROW(sftr_weights(params(0.5, -0.1), 4), std::domain_error);
  EXPECT_THROW(sftr_weights(params(0.5, 0.6), 4), std::domain_error);
  EXPECT_THROW(sftr_weights(params(std::nan(""), 0.1), 4), std::domain_error);
  EXPECT_THROW(series_weights(params(0.5, 0.6), 4), std::domain_error);
  EXPECT_NO_THROW(sftr_weights(params(0.5, 0.6), 4, ShiftPolicy::AllowUnstable));
  EXPECT_THROW(sftr_weights(params(0.5, -0.1), 4, ShiftPolicy::AllowUnstable), std::domain_error);
}

TEST(SchemeParams, DerivedConstants) {
  const auto p = params(0.6, 0.2);
  EXPECT_NEAR(p.mu0(), std::pow(1.2 / 1.0, 0.6), 1e-15);
  EXPECT_NEAR(p.mu1(), 0.2 / 1.0, 1e-15);
  for (double theta : {0.01, 0.2, 0.5}) {
    const double m = params(0.9, theta).mu1();
    EXPECT_GT(m, -1.0);
    EXPECT_LT(m, 1.0);
  }
  const auto g = SchemeParams::over_horizon(0.5, 0.1, 2.0, 8);
  EXPECT_DOUBLE_EQ(g.tau, 0.25);
  EXPECT_EQ(g.n_steps, 8);
  EXPECT_THROW(SchemeParams::over_horizon(0.5, 0.1, 0.0, 8), std::domain_error);
  EXPECT_THROW(SchemeParams::over_horizon(0.5, 0.1, 1.0, 0), std::domain_error);
}

TEST(Fbdf2Weights, OrderOneIsThePolynomial) {
  const auto w = fbdf2_weights(1.0, 4);
  EXPECT_DOUBLE_EQ(w[0], 1.5);
  EXPECT_DOUBLE_EQ(w[1], -2.0);
  EXPECT_DOUBLE_EQ(w[2], 0.5);
  EXPECT_NEAR(w[3], 0.0, 1e-15);
  EXPECT_NEAR(w[4], 0.0, 1e-15);
}

TEST(Fbdf2Weights, LeadingWeight) {
  EXPECT_NEAR(fbdf2_weights(0.5, 0)[0], 1.224744871391589, 1e-15);
}

TEST(Fbdf2Weights, FactoredBinomialOracle) {
  // 3/2 - 2 xi + xi^2/2 = (3/2) (1 - xi) (1 - xi/3)
  const double alpha = 0.65;
  const auto w = fbdf2_weights(alpha, 400);
  const auto prod = oracle::convolve(oracle::binomial_series(alpha, -1.0L, 400),
                                     oracle::binomial_series(alpha, -1.0L / 3.0L, 400), 400);
  for (std::size_t k = 0; k <= 400; ++k)
    EXPECT_NEAR(w[k], static_cast<double>(std::pow(1.5L, alpha) * prod[k]), 1e-13);
}

TEST(Fbdf2Weights, PartialSumsTendToZero) {
  const auto w = fbdf2_weights(0.7, 20000);
  const double s = std::accumulate(w.values().begin(), w.values().end(), 0.0);
  EXPECT_LT(std::abs(s), 2e-3);
}

TEST(CnFbdf2Weights, ZeroShiftIsPlainFbdf2) {
  EXPECT_EQ(table(cn_fbdf2_weights(0.4, 0.0, 30)), table(fbdf2_weights(0.4, 30)));
}

TEST(CnFbdf2Weights, HandMultipliedPolynomial) {
  const auto w = cn_fbdf2_weights(1.0, 0.5, 3);
  EXPECT_DOUBLE_EQ(w[0], 0.75);
  EXPECT_DOUBLE_EQ(w[1], -0.25);
  EXPECT_DOUBLE_EQ(w[2], -0.75);
  EXPECT_DOUBLE_EQ(w[3], 0.25);
}

TEST(CnFbdf2Weights, ConvolutionOfShiftAndFbdf2) {
  const double alpha = 0.3, theta = 0.2;
  const auto w = cn_fbdf2_weights(alpha, theta, 100);
  const auto f = fbdf2_weights(alpha, 100);
  EXPECT_NEAR(w[0], (1.0 - theta) * std::pow(1.5, alpha), 1e-15);
  for (std::size_t k = 1; k <= 100; ++k)
    EXPECT_NEAR(w[k], (1.0 - theta) * f[k] + theta * f[k - 1], 1e-15);
  EXPECT_EQ(w.kind(), WeightKind::CnFbdf2);
  EXPECT_THROW(cn_fbdf2_weights(alpha, 0.7, 4), std::domain_error);
  EXPECT_THROW(fbdf2_weights(0.0, 4), std::domain_error);
}

TEST(PowerSeriesPow, BinomialAndErrors) {
  const std::vector<double> base{1.0, -1.0};
  const auto c = power_series_pow(base, 0.5, 10);
  const auto ref = oracle::binomial_series(0.5L, -1.0L, 10);
  for (std::size_t k = 0; k <= 10; ++k) EXPECT_NEAR(c[k], static_cast<double>(ref[k]), 1e-16);
  const std::vector<double> bad{0.0, 1.0};
  EXPECT_THROW(power_series_pow(bad, 0.5, 3), std::domain_error);
}

TEST(WeightTable, AccessorsAndBounds) {
  const auto w = sftr_weights(params(0.5, 0.25), 3);
  EXPECT_EQ(w.kind(), WeightKind::Sftr);
  EXPECT_EQ(w.alpha(), 0.5);
  EXPECT_EQ(w.theta(), 0.25);
  EXPECT_THROW(w.at(4), std::out_of_range);
}

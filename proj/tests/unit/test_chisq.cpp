#include <cmath>

#include <gtest/gtest.h>

#include "kssd/chisq.hpp"
#include "kssd/errors.hpp"
#include "oracles.hpp"

using namespace kssd;

// Reference values: scipy.stats.ncx2.cdf / chi2.cdf / chi2.ppf.
struct NcxCase {
  double x, dof, lambda, expected;
};

TEST(NoncentralChisq, MatchesReferenceValues) {
  const NcxCase cases[] = {
      {10.0, 4.0, 3.0, 0.7837631816817809},  {5.0, 2.0, 1.0, 0.8107099625707197},
      {30.0, 10.0, 15.0, 0.735400871492951}, {120.0, 100.0, 10.0, 0.7496201872400079},
      {3.0, 1.0, 0.5, 0.839944426939826},    {50.0, 20.0, 25.0, 0.6860807086365752},
      {0.5, 3.0, 2.0, 0.03283956190317825},
  };
  for (const auto& c : cases) {
    EXPECT_NEAR(noncentral_chisq_cdf(c.x, c.dof, c.lambda), c.expected, 1e-10)
        << "x=" << c.x << " dof=" << c.dof << " lambda=" << c.lambda;
  }
}

TEST(CentralChisq, ReferenceValues) {
  EXPECT_NEAR(central_chisq_cdf(4.0, 4.0), 0.5939941502901616, 1e-12);
  EXPECT_NEAR(central_chisq_quantile(0.95, 100.0), 124.34211340400407, 1e-8);
  EXPECT_NEAR(central_chisq_cdf(central_chisq_quantile(0.3, 7.0), 7.0), 0.3, 1e-12);
}

TEST(NoncentralChisq, ZeroNoncentralityIsCentral) {
  for (double dof = 1.0; dof <= 100.0; dof += 9.0) {
    const double at_dof = noncentral_chisq_cdf(dof, dof, 0.0);
    EXPECT_NEAR(at_dof, central_chisq_cdf(dof, dof), 1e-14);
    EXPECT_GT(at_dof, 0.4);
    EXPECT_LT(at_dof, 0.7);
  }
}

TEST(NoncentralChisq, LimitsAndMonotonicity) {
  EXPECT_EQ(noncentral_chisq_cdf(0.0, 5.0, 2.0), 0.0);
  EXPECT_NEAR(noncentral_chisq_cdf(1e4, 5.0, 2.0), 1.0, 1e-12);
  double prev = 0.0;
  for (double x = 0.0; x <= 60.0; x += 0.25) {
    const double v = noncentral_chisq_cdf(x, 8.0, 6.0);
    EXPECT_GE(v, prev);
    EXPECT_LE(v, 1.0);
    prev = v;
  }
}

TEST(NoncentralChisq, LargeNoncentrality) {
  // Mean dof + lambda, variance 2(dof + 2 lambda): the CDF at the mean is near 1/2.
  const double v = noncentral_chisq_cdf(2010.0, 10.0, 2000.0);
  EXPECT_GT(v, 0.45);
  EXPECT_LT(v, 0.55);
}

TEST(NoncentralChisq, MatchesSimulationOracle) {
  const double sim = oracle::simulated_noncentral_chisq_cdf(10.0, 4, 3.0, 1000000, 77);
  EXPECT_NEAR(noncentral_chisq_cdf(10.0, 4.0, 3.0), sim, 0.0015);
}

TEST(NoncentralChisq, RejectsBadArguments) {
  EXPECT_THROW(noncentral_chisq_cdf(1.0, 0.0, 1.0), InvalidArgument);
  EXPECT_THROW(noncentral_chisq_cdf(1.0, 2.0, -1.0), InvalidArgument);
  EXPECT_THROW(central_chisq_quantile(1.0, 3.0), InvalidArgument);
}

#include "vsl/normal.hpp"

#include <gtest/gtest.h>

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>

namespace {

using Float50 = boost::multiprecision::cpp_bin_float_50;

// 50-digit reference values, independent of the std::erfc / AS241 path.
double oracle_cdf(double x) {
  const Float50 v = boost::math::erfc(-Float50(x) / boost::multiprecision::sqrt(Float50(2))) / 2;
  return v.convert_to<double>();
}

double oracle_quantile(double p) {
  const Float50 v = -boost::math::erfc_inv(Float50(2) * Float50(p)) * boost::multiprecision::sqrt(Float50(2));
  return v.convert_to<double>();
}

TEST(NormalCdf, Symmetry) {
  EXPECT_EQ(vsl::normal_cdf(0.0), 0.5);
  for (double x : {0.1, 0.7, 1.5, 3.0, 6.0}) EXPECT_NEAR(vsl::normal_cdf(-x), 1.0 - vsl::normal_cdf(x), 1e-15);
}

TEST(NormalCdf, FrozenValues) {
  // mpmath at 40 digits.
  EXPECT_NEAR(vsl::normal_cdf(2.0), 0.9772498680518207928, 1e-15);
  EXPECT_NEAR(vsl::normal_cdf(1.5), 0.9331927987311419340, 1e-15);
  EXPECT_NEAR(vsl::normal_cdf(-1.234), 0.1086014521215242842, 1e-15);
  EXPECT_NEAR(vsl::normal_cdf(-8.0), 6.220960574271784e-16, 1e-25);
}

TEST(NormalCdf, AbsoluteErrorBelow1e9OverRange) {
  double worst = 0.0;
  for (double x = -8.0; x <= 8.0; x += 0.01) worst = std::max(worst, std::fabs(vsl::normal_cdf(x) - oracle_cdf(x)));
  EXPECT_LT(worst, 1e-9);
}

TEST(NormalQuantile, MatchesOracle) {
  double worst = 0.0;
  for (int i = 1; i < 2000; ++i) {
    const double p = i / 2000.0;
    worst = std::max(worst, std::fabs(vsl::normal_quantile(p) - oracle_quantile(p)));
  }
  EXPECT_LT(worst, 1e-12);
  EXPECT_NEAR(vsl::normal_quantile(1e-12), oracle_quantile(1e-12), 1e-10);
}

TEST(NormalQuantile, InverseRoundTrip) {
  EXPECT_NEAR(vsl::normal_quantile(vsl::normal_cdf(1.234)), 1.234, 1e-8);
  // Above x = 5, Phi(x) in double lies within 3e-7 of 1 and the rounding of p
  // alone moves the inverse by more than 1e-8, so the upper tail is checked
  // through the symmetric lower-tail value instead.
  for (double x = -8.0; x <= 5.0; x += 0.25) EXPECT_NEAR(vsl::normal_quantile(vsl::normal_cdf(x)), x, 1e-8) << x;
  for (double x = 5.0; x <= 8.0; x += 0.25) EXPECT_NEAR(-vsl::normal_quantile(vsl::normal_cdf(-x)), x, 1e-8) << x;
}

TEST(NormalQuantile, RejectsClosedEndpoints) {
  EXPECT_THROW(vsl::normal_quantile(0.0), vsl::ValidationError);
  EXPECT_THROW(vsl::normal_quantile(1.0), vsl::ValidationError);
  EXPECT_THROW(vsl::normal_quantile(-0.1), vsl::ValidationError);
  EXPECT_THROW(vsl::normal_quantile(std::nan("")), vsl::ValidationError);
}

TEST(LogNormalCdf, AgreesWithDirectLogAndExtendsTail) {
  for (double x : {-20.0, -5.0, -1.0, 0.0, 1.0, 5.0}) EXPECT_NEAR(vsl::log_normal_cdf(x), std::log(vsl::normal_cdf(x)), 1e-12);
  // Upper tail: log Phi(x) ~ -Phi(-x).
  EXPECT_NEAR(vsl::log_normal_cdf(9.0), -vsl::normal_cdf(-9.0), 1e-30);
  // Deep lower tail stays finite where Phi underflows.
  EXPECT_TRUE(std::isfinite(vsl::log_normal_cdf(-60.0)));
  EXPECT_NEAR(vsl::log_normal_cdf(-35.0), std::log(oracle_cdf(-35.0)), 1e-6);
}

}  // namespace

#include "vsl/nelder_mead.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

TEST(NelderMead, Rosenbrock) {
  auto f = [](const vsl::Vector& x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); };
  vsl::Box box{{-5, -5}, {5, 5}};
  vsl::NelderMeadOptions opt;
  opt.max_evaluations = 5000;
  opt.diameter_tolerance = 1e-9;
  const auto r = vsl::nelder_mead(f, {-1.2, 1.0}, {0.1, 0.1}, box, opt);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(NelderMead, RespectsBoxAtActiveBound) {
  // Unconstrained minimum at (-1, 2); the box pins x0 at 0.
  auto f = [](const vsl::Vector& x) { return std::pow(x[0] + 1, 2) + std::pow(x[1] - 2, 2); };
  vsl::Box box{{0, -10}, {10, 10}};
  const auto r = vsl::nelder_mead(f, {3, 3}, {0.5, 0.5}, box);
  EXPECT_TRUE(r.converged);
  EXPECT_GE(r.x[0], 0.0);
  EXPECT_NEAR(r.x[0], 0.0, 1e-5);
  EXPECT_NEAR(r.x[1], 2.0, 1e-5);
}

TEST(NelderMead, BudgetExhaustionReportsNotConverged) {
  auto f = [](const vsl::Vector& x) { return x[0] * x[0] + x[1] * x[1]; };
  vsl::NelderMeadOptions opt;
  opt.max_evaluations = 10;
  const auto r = vsl::nelder_mead(f, {3, 3}, {1, 1}, vsl::Box{{-9, -9}, {9, 9}}, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.evaluations, 10 + 3);
  EXPECT_LT(r.value, 18.0);
}

TEST(GoldenSection, InteriorAndBoundaryMinima) {
  EXPECT_NEAR(vsl::golden_section_minimize([](double x) { return (x - 1.3) * (x - 1.3); }, 0, 5), 1.3, 1e-7);
  EXPECT_EQ(vsl::golden_section_minimize([](double x) { return x; }, 0, 5), 0.0);
  EXPECT_EQ(vsl::golden_section_minimize([](double x) { return -x; }, 0, 5), 5.0);
}

}  // namespace

#pragma once

// Brute-force max-rule simulation used as an oracle. It draws from the
// standard library's engine and distribution, sharing no code with the
// library's own sampler or its analytic rates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace vsl::test_support {

struct McRates {
  double hit = 0.0;
  double fa = 0.0;
  double pc() const { return 0.5 * (hit + 1.0 - fa); }
};

inline McRates monte_carlo_max_rule(double d1, double alpha, int n, double criterion, long trials,
                                    std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const double dn = d1 * std::pow(static_cast<double>(n), -alpha / 2.0);
  long hits = 0, fas = 0;
  for (long t = 0; t < trials; ++t) {
    double m = z(eng) + dn;
    for (int i = 1; i < n; ++i) m = std::max(m, z(eng));
    hits += m > criterion;
    m = z(eng);
    for (int i = 1; i < n; ++i) m = std::max(m, z(eng));
    fas += m > criterion;
  }
  return {static_cast<double>(hits) / trials, static_cast<double>(fas) / trials};
}

}  // namespace vsl::test_support

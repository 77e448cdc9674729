#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vsl/errors.hpp"
#include "vsl/nelder_mead.hpp"
#include "vsl/normal.hpp"
#include "vsl/records.hpp"

namespace vsl {

// Max-rule search model. Each of n items yields a unit-variance Gaussian
// response; the target's mean is d_n = d1 * n^(-alpha/2), i.e. internal noise
// variance grows as n^alpha. The observer says "present" iff the largest
// response exceeds the criterion c:
//   H  = 1 - Phi(c - d_n) Phi(c)^(n-1)
//   FA = 1 - Phi(c)^n
// alpha = 0 is unlimited capacity, alpha = 1 fixed capacity.

inline constexpr double kAlphaMin = 0.0;
inline constexpr double kAlphaMax = 2.0;

struct ModelParams {
  std::map<int, double> d1_by_difficulty;
  double alpha = 0.0;
};

/// Model prediction for one set size at one criterion. The complements are
/// computed directly so that likelihood terms keep precision near 0 and 1.
struct ModelEval {
  int set_size = 1;
  double criterion = 0.0;
  double hit_rate = 0.5;
  double fa_rate = 0.5;
  double miss_rate = 0.5;  // 1 - H
  double cr_rate = 0.5;    // 1 - FA
  double pc = 0.5;
};

inline double item_dprime(double d1, double alpha, int n) {
  return d1 * std::pow(static_cast<double>(n), -0.5 * alpha);
}

namespace detail {

// Phi(c) - Phi(c - d) for d >= 0, evaluated in whichever tail avoids cancellation.
inline double cdf_gap(double c, double d) {
  if (c - d > 0.0) return normal_cdf(d - c) - normal_cdf(-c);
  return normal_cdf(c) - normal_cdf(c - d);
}

inline ModelEval rates_at(double dn, int n, double c) {
  const double log_phi = log_normal_cdf(c);
  const double nm1 = static_cast<double>(n - 1);
  const double pow_nm1 = std::exp(nm1 * log_phi);           // Phi(c)^(n-1)
  const double one_minus_pow_nm1 = -std::expm1(nm1 * log_phi);

  ModelEval e;
  e.set_size = n;
  e.criterion = c;
  e.cr_rate = std::exp(static_cast<double>(n) * log_phi);
  e.fa_rate = -std::expm1(static_cast<double>(n) * log_phi);
  e.miss_rate = normal_cdf(c - dn) * pow_nm1;
  e.hit_rate = normal_cdf(dn - c) + normal_cdf(c - dn) * one_minus_pow_nm1;
  e.pc = 0.5 + 0.5 * pow_nm1 * cdf_gap(c, dn);
  return e;
}

// d pc / dc divided by the positive factor phi(c) Phi(c)^(n-2) / 2; its sign
// change locates the optimal criterion.
inline double criterion_gradient(double dn, int n, double c) {
  return -normal_cdf(c) * std::expm1(dn * (c - 0.5 * dn)) + static_cast<double>(n - 1) * cdf_gap(c, dn);
}

}  // namespace detail

inline ModelEval predicted_rates(double d1, double alpha, int n, double criterion) {
  if (n < 1) throw ValidationError("set size must be >= 1");
  return detail::rates_at(item_dprime(d1, alpha, n), n, criterion);
}

/// Search interval for the optimal criterion.
inline std::pair<double, double> criterion_bracket(double dn) { return {-2.0, dn + 8.0}; }

/// Criterion maximizing proportion correct under equal priors. Found by
/// bisection on the sign of d pc / dc, which is positive at the lower end of
/// the bracket and negative at the upper end whenever d_n > 0.
inline double optimal_criterion(double d1, double alpha, int n) {
  if (n < 1) throw ValidationError("set size must be >= 1");
  if (!(d1 >= 0.0) || !std::isfinite(d1)) throw ValidationError("d1 must be finite and >= 0");
  const double dn = item_dprime(d1, alpha, n);
  auto [lo, hi] = criterion_bracket(dn);
  // pc is flat in c when the target is indistinguishable.
  if (dn < 1e-9) return 0.5 * (lo + hi);

  const double g_lo = detail::criterion_gradient(dn, n, lo);
  const double g_hi = detail::criterion_gradient(dn, n, hi);
  if (!(g_lo > 0.0) || !(g_hi < 0.0)) {
    throw BracketError("optimal_criterion: pc is not maximized inside [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "] for d_n=" + std::to_string(dn) +
                       ", n=" + std::to_string(n));
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::fabs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (detail::criterion_gradient(dn, n, mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Model rates at the optimal criterion for set size n.
inline ModelEval evaluate_optimal(double d1, double alpha, int n) {
  return predicted_rates(d1, alpha, n, optimal_criterion(d1, alpha, n));
}

inline double predicted_pc(double d1, double alpha, int n) { return evaluate_optimal(d1, alpha, n).pc; }

namespace detail {

inline constexpr double kRateFloor = 1e-12;

inline double clamp_rate(double p) { return std::clamp(p, kRateFloor, 1.0 - kRateFloor); }

inline double cell_nll(const CellStats& cell, double d1, double alpha) {
  const ModelEval e = evaluate_optimal(d1, alpha, cell.set_size);
  const auto h = static_cast<double>(cell.hits);
  const auto m = static_cast<double>(cell.n_present - cell.hits);
  const auto f = static_cast<double>(cell.false_alarms);
  const auto cr = static_cast<double>(cell.n_absent - cell.false_alarms);
  return -(h * std::log(clamp_rate(e.hit_rate)) + m * std::log(clamp_rate(e.miss_rate)) +
           f * std::log(clamp_rate(e.fa_rate)) + cr * std::log(clamp_rate(e.cr_rate)));
}

}  // namespace detail

/// Joint binomial negative log-likelihood of hits and false alarms, each cell
/// evaluated at its own optimal criterion.
inline double neg_log_likelihood(const ModelParams& params, const std::vector<CellStats>& cells) {
  double total = 0.0;
  for (const CellStats& cell : cells) {
    const auto it = params.d1_by_difficulty.find(cell.difficulty);
    if (it == params.d1_by_difficulty.end())
      throw ParameterShapeError("no d1 for difficulty " + std::to_string(cell.difficulty));
    total += detail::cell_nll(cell, it->second, params.alpha);
  }
  return total;
}

struct FitOptions {
  std::vector<double> alpha_grid = [] {
    std::vector<double> g;
    for (int k = 0; k <= 15; ++k) g.push_back(0.1 * k);
    return g;
  }();
  double d1_max = 10.0;
  double d1_tolerance = 1e-7;  // grid-stage 1-D search
  NelderMeadOptions simplex{};
};

struct CapacityFit {
  ModelParams params;
  double neg_log_likelihood = 0.0;
  bool converged = false;
  int evaluations = 0;
  std::vector<std::pair<double, double>> alpha_profile;  // (alpha, NLL) from the grid stage
};

/// Maximum-likelihood fit of one shared alpha and one d1 per difficulty level.
/// Stage 1 profiles alpha over a grid, optimizing each d1 separately (the
/// levels decouple for fixed alpha). Stage 2 polishes all parameters jointly
/// with Nelder-Mead from the best grid point.
inline CapacityFit fit_capacity(const std::vector<CellStats>& cells, const FitOptions& opt = {}) {
  std::set<int> set_sizes;
  std::map<int, std::vector<CellStats>> by_level;
  for (const CellStats& c : cells) {
    if (c.trials() <= 0) continue;
    set_sizes.insert(c.set_size);
    by_level[c.difficulty].push_back(c);
  }
  if (set_sizes.size() < 2)
    throw InsufficientDataError("capacity fit needs at least 2 distinct set sizes with data");
  if (opt.alpha_grid.empty()) throw ValidationError("alpha grid is empty");

  std::vector<int> levels;
  for (const auto& [lv, _] : by_level) levels.push_back(lv);

  CapacityFit fit;
  ModelParams best;
  double best_nll = std::numeric_limits<double>::infinity();
  for (double alpha : opt.alpha_grid) {
    alpha = std::clamp(alpha, kAlphaMin, kAlphaMax);
    ModelParams p;
    p.alpha = alpha;
    double nll = 0.0;
    for (const auto& [lv, lv_cells] : by_level) {
      auto level_nll = [&](double d1) {
        double s = 0.0;
        for (const CellStats& c : lv_cells) s += detail::cell_nll(c, d1, alpha);
        return s;
      };
      const double d1 = golden_section_minimize(level_nll, 0.0, opt.d1_max, opt.d1_tolerance);
      p.d1_by_difficulty[lv] = d1;
      nll += level_nll(d1);
    }
    fit.alpha_profile.emplace_back(alpha, nll);
    if (nll < best_nll) {
      best_nll = nll;
      best = p;
    }
  }

  // x = (d1 for each level in ascending order, alpha).
  Vector start, steps;
  Box box;
  for (int lv : levels) {
    start.push_back(best.d1_by_difficulty[lv]);
    steps.push_back(0.1);
    box.lower.push_back(0.0);
    box.upper.push_back(opt.d1_max);
  }
  start.push_back(best.alpha);
  steps.push_back(0.05);
  box.lower.push_back(kAlphaMin);
  box.upper.push_back(kAlphaMax);

  auto to_params = [&](const Vector& x) {
    ModelParams p;
    for (std::size_t i = 0; i < levels.size(); ++i) p.d1_by_difficulty[levels[i]] = x[i];
    p.alpha = x.back();
    return p;
  };
  const NelderMeadResult nm =
      nelder_mead([&](const Vector& x) { return neg_log_likelihood(to_params(x), cells); }, start,
                  steps, box, opt.simplex);

  if (nm.value <= best_nll) {
    fit.params = to_params(nm.x);
    fit.neg_log_likelihood = nm.value;
  } else {
    fit.params = best;
    fit.neg_log_likelihood = best_nll;
  }
  fit.converged = nm.converged;
  fit.evaluations = nm.evaluations;
  return fit;
}

}  // namespace vsl

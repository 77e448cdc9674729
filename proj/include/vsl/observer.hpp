#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <variant>

#include "vsl/capacity_model.hpp"
#include "vsl/dataset.hpp"
#include "vsl/errors.hpp"
#include "vsl/records.hpp"
#include "vsl/rng.hpp"

namespace vsl {

struct OptimalCriterion {};
struct FixedCriterion {
  double c = 0.0;
};
using CriterionPolicy = std::variant<OptimalCriterion, FixedCriterion>;

/// Simulated max-rule observer with capacity exponent `alpha`.
struct ObserverParams {
  double d1 = 0.0;
  double alpha = 0.0;
  CriterionPolicy criterion = OptimalCriterion{};
  std::uint64_t seed = 0;

  void validate() const {
    if (!(d1 >= 0.0) || !std::isfinite(d1)) throw ValidationError("observer d1 must be finite and >= 0");
    if (!(alpha >= kAlphaMin && alpha <= kAlphaMax))
      throw ValidationError("observer alpha must lie in [0, 2]");
    if (const auto* f = std::get_if<FixedCriterion>(&criterion); f && !std::isfinite(f->c))
      throw ValidationError("fixed criterion must be finite");
  }
};

/// Criterion used by the observer at set size n.
inline double observer_criterion(const ObserverParams& p, int n) {
  if (const auto* f = std::get_if<FixedCriterion>(&p.criterion)) return f->c;
  return optimal_criterion(p.d1, p.alpha, n);
}

/// One max-rule decision: n unit-variance item responses, the target (if any)
/// shifted by `dn`; "present" iff the maximum exceeds `criterion`.
inline Response decide_max_rule(double dn, int n, bool target_present, double criterion, Xoshiro256& rng) {
  double max_response = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal() + (target_present && i == 0 ? dn : 0.0);
    max_response = std::max(max_response, x);
  }
  return max_response > criterion ? Response::Present : Response::Absent;
}

inline Response sample_trial(const ObserverParams& p, int n, bool target_present, Xoshiro256& rng) {
  if (n < 1) throw ValidationError("set size must be >= 1");
  return decide_max_rule(item_dprime(p.d1, p.alpha, n), n, target_present, observer_criterion(p, n), rng);
}

/// Per-trial stream: depends only on the observer seed and the trial id.
inline Xoshiro256 trial_stream(std::uint64_t observer_seed, std::string_view trial_id) {
  return Xoshiro256(derive_seed(observer_seed, fnv1a64(trial_id)));
}

/// Responses for every test-split row of `manifest`, in manifest order.
inline ResponseFile simulate_observer(const ObserverParams& p, const Manifest& manifest) {
  p.validate();
  std::map<int, double> criterion_cache;
  ResponseFile out;
  for (const ManifestRow& row : manifest) {
    if (row.split != Split::Test) continue;
    if (row.set_size < 1) throw ValidationError("trial " + row.trial_id + ": set_size must be >= 1");
    auto [it, inserted] = criterion_cache.try_emplace(row.set_size, 0.0);
    if (inserted) it->second = observer_criterion(p, row.set_size);
    Xoshiro256 rng = trial_stream(p.seed, row.trial_id);
    const Response r = decide_max_rule(item_dprime(p.d1, p.alpha, row.set_size), row.set_size,
                                       row.target_present, it->second, rng);
    out.push_back({row.trial_id, r, std::nullopt});
  }
  return out;
}

}  // namespace vsl

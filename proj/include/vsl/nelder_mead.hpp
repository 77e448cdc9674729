#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace vsl {

using Vector = std::vector<double>;

/// Box constraint applied by projection: every trial point is clamped into
/// [lower, upper] before evaluation.
struct Box {
  Vector lower;
  Vector upper;

  void project(Vector& x) const {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  }
};

struct NelderMeadOptions {
  double diameter_tolerance = 1e-6;
  int max_evaluations = 2000;
  // Standard coefficients.
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
};

struct NelderMeadResult {
  Vector x;
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
  int evaluations = 0;
  double diameter = std::numeric_limits<double>::infinity();
};

/// Largest infinity-norm distance from the best vertex to any other vertex.
inline double simplex_diameter(const std::vector<Vector>& simplex) {
  double d = 0.0;
  for (std::size_t v = 1; v < simplex.size(); ++v)
    for (std::size_t i = 0; i < simplex[v].size(); ++i)
      d = std::max(d, std::fabs(simplex[v][i] - simplex[0][i]));
  return d;
}

/// Derivative-free minimization of `f` from `start`, with an axis-aligned
/// initial simplex of the given per-coordinate `steps`. A step that would
/// leave the box is taken in the opposite direction.
template <class Objective>
NelderMeadResult nelder_mead(Objective&& f, Vector start, const Vector& steps, const Box& box,
                             const NelderMeadOptions& opt = {}) {
  const std::size_t dim = start.size();
  NelderMeadResult res;
  box.project(start);

  auto eval = [&](const Vector& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<Vector> simplex{start};
  std::vector<double> values{eval(start)};
  for (std::size_t i = 0; i < dim; ++i) {
    Vector x = start;
    x[i] += steps[i];
    if (x[i] > box.upper[i]) x[i] = start[i] - steps[i];
    box.project(x);
    simplex.push_back(x);
    values.push_back(eval(x));
  }

  std::vector<std::size_t> order(dim + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<Vector> s;
    std::vector<double> v;
    for (std::size_t k : order) {
      s.push_back(std::move(simplex[k]));
      v.push_back(values[k]);
    }
    simplex = std::move(s);
    values = std::move(v);
  };

  auto along = [&](const Vector& centroid, const Vector& worst, double t) {
    Vector x(dim);
    for (std::size_t i = 0; i < dim; ++i) x[i] = centroid[i] + t * (centroid[i] - worst[i]);
    box.project(x);
    return x;
  };

  for (;;) {
    sort_simplex();
    res.diameter = simplex_diameter(simplex);
    if (res.diameter < opt.diameter_tolerance) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= opt.max_evaluations) break;

    Vector centroid(dim, 0.0);
    for (std::size_t v = 0; v < dim; ++v)
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[v][i] / static_cast<double>(dim);

    const Vector& worst = simplex[dim];
    const Vector xr = along(centroid, worst, opt.reflection);
    const double fr = eval(xr);

    if (fr < values[0]) {
      const Vector xe = along(centroid, worst, opt.expansion);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[dim] = xe;
        values[dim] = fe;
      } else {
        simplex[dim] = xr;
        values[dim] = fr;
      }
      continue;
    }
    if (fr < values[dim - 1]) {
      simplex[dim] = xr;
      values[dim] = fr;
      continue;
    }
    // Contraction: outside if the reflected point beat the worst, else inside.
    const bool outside = fr < values[dim];
    const Vector xc = along(centroid, worst, outside ? opt.contraction : -opt.contraction);
    const double fc = eval(xc);
    if (fc < (outside ? fr : values[dim])) {
      simplex[dim] = xc;
      values[dim] = fc;
      continue;
    }
    for (std::size_t v = 1; v <= dim; ++v) {
      for (std::size_t i = 0; i < dim; ++i)
        simplex[v][i] = simplex[0][i] + opt.shrink * (simplex[v][i] - simplex[0][i]);
      box.project(simplex[v]);
      values[v] = eval(simplex[v]);
    }
  }

  res.x = simplex[0];
  res.value = values[0];
  return res;
}

/// Golden-section minimization of a unimodal function on [lo, hi].
template <class Objective>
double golden_section_minimize(Objective&& f, double lo, double hi, double tol = 1e-8) {
  constexpr double inv_phi = 0.61803398874989484820;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  // The interior minimum may still lose to an end point for monotone f.
  const double mid = 0.5 * (a + b);
  double best = mid, fbest = f(mid);
  if (const double flo = f(lo); flo < fbest) best = lo, fbest = flo;
  if (const double fhi = f(hi); fhi < fbest) best = hi;
  return best;
}

}  // namespace vsl

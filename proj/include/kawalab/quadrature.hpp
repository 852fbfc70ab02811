#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "kawalab/errors.hpp"
#include "kawalab/geometry.hpp"

namespace kawalab {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = std::numeric_limits<double>::infinity();
  bool converged = false;
};

namespace detail {

// Recursive trapezoid bisection with a Richardson check per panel.
template <typename F>
double adaptive_panel(const F& f, double a, double b, double fa, double fb,
                      double tol, int depth, double& err_acc, bool& ok) {
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double coarse = 0.5 * (b - a) * (fa + fb);
  const double fine = 0.25 * (b - a) * (fa + 2.0 * fm + fb);
  const double err = std::abs(fine - coarse) / 3.0;
  if (err <= tol || depth >= 52) {
    if (err > tol) ok = false;
    err_acc += err;
    return fine + (fine - coarse) / 3.0;
  }
  return adaptive_panel(f, a, m, fa, fm, 0.5 * tol, depth + 1, err_acc, ok) +
         adaptive_panel(f, m, b, fm, fb, 0.5 * tol, depth + 1, err_acc, ok);
}

}  // namespace detail

// Integrates a smooth f over [a, b].  Integrands with known discontinuities
// should go through integrate_1d_pieces instead.
template <typename F>
QuadratureResult integrate_1d(const F& f, double a, double b,
                              double tol = 1e-10) {
  require(b >= a, "integrate_1d: empty interval");
  QuadratureResult r;
  if (a == b) {
    r.value = 0.0;
    r.error_estimate = 0.0;
    r.converged = true;
    return r;
  }
  bool ok = true;
  double err = 0.0;
  // Seed with a few panels so symmetric integrands do not fool the estimator.
  const int seed_panels = 8;
  const double h = (b - a) / seed_panels;
  double total = 0.0;
  for (int i = 0; i < seed_panels; ++i) {
    const double x0 = a + i * h;
    const double x1 = (i + 1 == seed_panels) ? b : a + (i + 1) * h;
    total += detail::adaptive_panel(f, x0, x1, f(x0), f(x1), tol / seed_panels,
                                    0, err, ok);
  }
  r.value = total;
  r.error_estimate = err;
  r.converged = ok;
  return r;
}

// Piecewise integration with breakpoints at the integrand's discontinuity
// or kink locations.  Each piece is evaluated on a hair inside its endpoints
// so jump values at the breakpoints themselves never enter the rule; the
// skipped slivers are O(1e-12) wide.
template <typename F>
QuadratureResult integrate_1d_pieces(const F& f, double a, double b,
                                     std::vector<double> breakpoints,
                                     double tol = 1e-10) {
  require(b >= a, "integrate_1d_pieces: empty interval");
  breakpoints.push_back(a);
  breakpoints.push_back(b);
  std::sort(breakpoints.begin(), breakpoints.end());
  QuadratureResult total;
  total.value = 0.0;
  total.error_estimate = 0.0;
  total.converged = true;
  double prev = a;
  for (double cut : breakpoints) {
    cut = std::min(std::max(cut, a), b);
    if (cut - prev < 1e-12) continue;
    const double nudge = 1e-12 * (1.0 + std::abs(prev) + std::abs(cut));
    const double lo = prev + nudge;
    const double hi = cut - nudge;
    if (hi > lo) {
      const QuadratureResult piece = integrate_1d(f, lo, hi, tol);
      total.value += piece.value;
      total.error_estimate += piece.error_estimate + nudge * 2.0;
      total.converged = total.converged && piece.converged;
    }
    prev = cut;
  }
  return total;
}

// Tensor-product integral over a box, D in {1, 2}.  `circles` lists known
// discontinuity circles (center, radius); in d=1 these are symmetric point
// pairs, in d=2 the per-line crossings feed the inner integrals.
template <std::size_t D>
struct DiscCircle {
  Point<D> center{};
  double radius = 0.0;
};

template <std::size_t D, typename F>
QuadratureResult integrate_box(const F& f, const Box<D>& box,
                               const std::vector<DiscCircle<D>>& circles = {},
                               double tol = 1e-9) {
  if constexpr (D == 1) {
    std::vector<double> cuts;
    for (const auto& c : circles) {
      cuts.push_back(c.center[0] - c.radius);
      cuts.push_back(c.center[0] + c.radius);
    }
    return integrate_1d_pieces([&](double x) { return f(Point<1>{x}); },
                               box.lo[0], box.hi[0], std::move(cuts), tol);
  } else {
    static_assert(D == 2, "integrate_box: only d=1,2 supported");
    bool ok = true;
    double inner_err = 0.0;
    auto outer = [&](double x) {
      std::vector<double> cuts;
      for (const auto& c : circles) {
        const double dx = x - c.center[0];
        const double q = c.radius * c.radius - dx * dx;
        if (q > 0.0) {
          const double s = std::sqrt(q);
          cuts.push_back(c.center[1] - s);
          cuts.push_back(c.center[1] + s);
        }
      }
      auto inner = integrate_1d_pieces(
          [&](double y) { return f(Point<2>{x, y}); }, box.lo[1], box.hi[1],
          std::move(cuts), tol);
      if (!inner.converged) ok = false;
      inner_err = std::max(inner_err, inner.error_estimate);
      return inner.value;
    };
    std::vector<double> outer_cuts;
    for (const auto& c : circles) {
      outer_cuts.push_back(c.center[0] - c.radius);
      outer_cuts.push_back(c.center[0] + c.radius);
    }
    QuadratureResult r = integrate_1d_pieces(outer, box.lo[0], box.hi[0],
                                             std::move(outer_cuts), tol);
    r.converged = r.converged && ok;
    r.error_estimate += inner_err * (box.hi[0] - box.lo[0]);
    return r;
  }
}

}  // namespace kawalab

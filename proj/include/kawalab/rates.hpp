#pragma once

#include <cmath>
#include <cstddef>

#include "kawalab/configuration.hpp"
#include "kawalab/errors.hpp"
#include "kawalab/model.hpp"
#include "kawalab/quadrature.hpp"

namespace kawalab {

// Repulsion exponent sum_{z in gamma \ mover} phi(z - y) for a candidate
// landing point y.
template <std::size_t D>
double repulsion_exponent(const Configuration<D>& gamma, std::size_t mover,
                          const Point<D>& y, const ModelParams<D>& params) {
  double s = 0.0;
  const double reach = params.potential.support_radius();
  for (std::size_t j = 0; j < gamma.size(); ++j) {
    if (j == mover) continue;
    const Point<D> d = params.domain.displacement(gamma[j], y);
    const double r = norm(d);
    if (r <= reach) s += params.potential.value_radial(r);
  }
  return s;
}

// Jump rate of the particle at index `mover` toward y:
//   psi_alpha(x) a(x - y) exp(- sum_{z != x} phi(z - y)).
// At alpha = 0 this is the plain state-dependent Kawasaki rate.
template <std::size_t D>
double rate_c(const Configuration<D>& gamma, std::size_t mover,
              const Point<D>& y, const ModelParams<D>& params) {
  require(mover < gamma.size(), "rate_c: mover index out of range");
  const Point<D>& x = gamma[mover];
  const double a = params.kernel.density(params.domain.displacement(x, y));
  if (a == 0.0) return 0.0;
  const double expo = repulsion_exponent(gamma, mover, y, params);
  return params.psi_alpha_tempered(x) * a * std::exp(-expo);
}

// Point-based overload; x must be an element of gamma (exact coordinates).
template <std::size_t D>
double rate_c(const Point<D>& x, const Point<D>& y,
              const Configuration<D>& gamma, const ModelParams<D>& params) {
  const auto idx = gamma.find(x);
  require(idx.has_value(), "rate_c: x is not a point of gamma");
  return rate_c(gamma, *idx, y, params);
}

enum class TotalRateMethod { quadrature, closed_form_free };

struct RateResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

template <std::size_t D>
struct RateIntegrationDomain {
  Box<D> cell;
  std::vector<DiscCircle<D>> cuts;
};

// Landing-point integration cell for one mover, with the known discontinuity
// circles: the kernel's support edge and the potential edge around each
// neighbor (nearest torus image in wrapped mode).
template <std::size_t D>
RateIntegrationDomain<D> rate_integration_domain(const Configuration<D>& gamma,
                                                 std::size_t mover,
                                                 const ModelParams<D>& params) {
  const Point<D>& x = gamma[mover];
  const double R = params.kernel.support_radius();
  RateIntegrationDomain<D> dom;
  for (std::size_t k = 0; k < D; ++k) {
    dom.cell.lo[k] = x[k] - R;
    dom.cell.hi[k] = x[k] + R;
  }
  bool clipped = false;
  if (params.domain.torus) {
    const auto& t = *params.domain.torus;
    for (std::size_t k = 0; k < D; ++k) {
      if (dom.cell.side(k) >= t.side(k)) {
        dom.cell.lo[k] = x[k] - 0.5 * t.side(k);
        dom.cell.hi[k] = x[k] + 0.5 * t.side(k);
        clipped = true;
      }
    }
  }
  if (!clipped) dom.cuts.push_back({x, R});
  const double reach = params.potential.support_radius();
  for (std::size_t j = 0; j < gamma.size(); ++j) {
    if (j == mover) continue;
    if (params.domain.torus) {
      const Point<D> d = params.domain.displacement(gamma[j], x);
      dom.cuts.push_back({x + d, reach});
    } else {
      dom.cuts.push_back({gamma[j], reach});
    }
  }
  return dom;
}

// Integrated jump rate of one particle over all landing points; bounded by
// psi_alpha(x) <= 1 since the kernel is normalized and phi >= 0.
template <std::size_t D>
RateResult total_rate(const Configuration<D>& gamma, std::size_t mover,
                      const ModelParams<D>& params,
                      TotalRateMethod method = TotalRateMethod::quadrature,
                      double tol = 1e-9) {
  require(mover < gamma.size(), "total_rate: mover index out of range");
  const Point<D>& x = gamma[mover];
  const double psi_a = params.psi_alpha_tempered(x);
  const bool free_case =
      params.potential.height() == 0.0 || gamma.size() == 1;
  if (method == TotalRateMethod::closed_form_free) {
    require(free_case, "total_rate: closed form requires a free-case rate");
    return {psi_a, 0.0};
  }
  if (free_case) return {psi_a, 0.0};

  const auto dom = rate_integration_domain(gamma, mover, params);
  auto integrand = [&](const Point<D>& y) { return rate_c(gamma, mover, y, params); };
  const QuadratureResult q = integrate_box<D>(integrand, dom.cell, dom.cuts, tol);
  if (!q.converged)
    throw internal_error("total_rate: quadrature did not converge, error ~ " +
                         std::to_string(q.error_estimate));
  return {q.value, q.error_estimate};
}

// Total jump activity Phi_alpha(gamma) = sum_x total_rate(x).  The two
// computable bounds are asserted: Phi_alpha <= |gamma| always, and
// Phi_alpha <= Psi(gamma)/alpha for alpha > 0.
template <std::size_t D>
double phi_alpha_total(const Configuration<D>& gamma,
                       const ModelParams<D>& params,
                       TotalRateMethod method = TotalRateMethod::quadrature) {
  double total = 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    const RateResult r = total_rate(gamma, i, params, method);
    total += r.value;
    err += r.error_estimate;
  }
  const double slack = 1e-9 + 10.0 * err;
  check_internal(total <= static_cast<double>(gamma.size()) + slack,
                 "phi_alpha_total: activity exceeds particle count");
  if (params.alpha > 0.0) {
    double psi_sum = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i)
      psi_sum += params.psi_tempered(gamma[i]);
    check_internal(total <= psi_sum / params.alpha + slack,
                   "phi_alpha_total: activity exceeds Psi/alpha");
  }
  return total;
}

}  // namespace kawalab

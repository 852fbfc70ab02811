#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kawalab/errors.hpp"
#include "kawalab/model.hpp"

namespace kawalab {

// Truncated correlation-function hierarchy on a periodic 1-d grid.  All
// operators act on plain arrays indexed by grid nodes; translation-invariant
// ingredients reduce to index differences, so circular sums are exact.

struct Grid1D {
  double half_length = 5.0;  // box [-R, R), periodic
  std::size_t nodes = 64;

  double h() const { return 2.0 * half_length / static_cast<double>(nodes); }
  double node(std::size_t i) const {
    return -half_length + static_cast<double>(i) * h();
  }
  // displacement value for an index difference, wrapped to [-R, R)
  double disp(std::size_t diff) const {
    double d = static_cast<double>(diff) * h();
    if (d >= half_length) d -= 2.0 * half_length;
    return d;
  }
  std::size_t diff(std::size_t i, std::size_t j) const {
    return (i + nodes - j) % nodes;
  }
  bool operator==(const Grid1D& o) const {
    return half_length == o.half_length && nodes == o.nodes;
  }
};

// Kernel and potential sampled on index differences.  The sampled kernel is
// renormalized to exact unit discrete mass so the discrete operator keeps
// the continuum normalization identities.
struct GridModel1D {
  Grid1D grid;
  std::vector<double> a;    // h * sum a == 1
  std::vector<double> tau;  // e^{-phi}
  std::vector<double> t;    // tau - 1

  double t_abs_l1() const {
    double s = 0.0;
    for (double v : t) s += std::abs(v);
    return s * grid.h();
  }

  bool interacting() const {
    for (double v : t)
      if (v != 0.0) return true;
    return false;
  }

  static GridModel1D build(const Grid1D& grid, const JumpKernel<1>& kernel,
                           const Potential<1>& potential) {
    GridModel1D m;
    m.grid = grid;
    m.a.resize(grid.nodes);
    m.tau.resize(grid.nodes);
    m.t.resize(grid.nodes);
    double mass = 0.0;
    for (std::size_t d = 0; d < grid.nodes; ++d) {
      const double x = grid.disp(d);
      m.a[d] = kernel.density_radial(std::abs(x));
      mass += m.a[d];
    }
    mass *= grid.h();
    check_internal(mass > 0.0, "GridModel1D: zero kernel mass on grid");
    for (double& v : m.a) v /= mass;
    for (std::size_t d = 0; d < grid.nodes; ++d) {
      const double x = grid.disp(d);
      m.tau[d] = std::exp(-potential.value_radial(std::abs(x)));
      m.t[d] = m.tau[d] - 1.0;
    }
    return m;
  }
};

// Correlation arrays k^(n), n <= n_max (<= 3), plus the scalar k(empty) = 1.
struct CorrelationTable {
  Grid1D grid;
  int n_max = 1;
  double k0 = 1.0;
  std::vector<double> k1;
  std::vector<double> k2;
  std::vector<double> k3;

  static constexpr std::size_t kMaxNodes = 256;
  static constexpr std::size_t kMaxNodesOrder3 = 48;

  static CorrelationTable zeros(const Grid1D& grid, int n_max) {
    require(n_max >= 1 && n_max <= 3, "CorrelationTable: n_max must be 1..3");
    require(grid.nodes >= 4 && grid.nodes <= kMaxNodes,
            "CorrelationTable: grid size out of range");
    require(n_max < 3 || grid.nodes <= kMaxNodesOrder3,
            "CorrelationTable: order-3 tables need nodes <= 48");
    CorrelationTable k;
    k.grid = grid;
    k.n_max = n_max;
    k.k1.assign(grid.nodes, 0.0);
    if (n_max >= 2) k.k2.assign(grid.nodes * grid.nodes, 0.0);
    if (n_max >= 3) k.k3.assign(grid.nodes * grid.nodes * grid.nodes, 0.0);
    return k;
  }

  static CorrelationTable poissonian(const Grid1D& grid, int n_max,
                                     double kappa) {
    CorrelationTable k = zeros(grid, n_max);
    std::fill(k.k1.begin(), k.k1.end(), kappa);
    std::fill(k.k2.begin(), k.k2.end(), kappa * kappa);
    std::fill(k.k3.begin(), k.k3.end(), kappa * kappa * kappa);
    return k;
  }

  double& at2(std::size_t i, std::size_t j) { return k2[i * grid.nodes + j]; }
  double at2(std::size_t i, std::size_t j) const {
    return k2[i * grid.nodes + j];
  }
  double& at3(std::size_t i, std::size_t j, std::size_t l) {
    return k3[(i * grid.nodes + j) * grid.nodes + l];
  }
  double at3(std::size_t i, std::size_t j, std::size_t l) const {
    return k3[(i * grid.nodes + j) * grid.nodes + l];
  }

  void symmetrize() {
    const std::size_t M = grid.nodes;
    if (n_max >= 2) {
      for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = i + 1; j < M; ++j) {
          const double v = 0.5 * (at2(i, j) + at2(j, i));
          at2(i, j) = at2(j, i) = v;
        }
    }
    if (n_max >= 3) {
      for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = i; j < M; ++j)
          for (std::size_t l = j; l < M; ++l) {
            const double v =
                (at3(i, j, l) + at3(i, l, j) + at3(j, i, l) + at3(j, l, i) +
                 at3(l, i, j) + at3(l, j, i)) /
                6.0;
            at3(i, j, l) = at3(i, l, j) = at3(j, i, l) = at3(j, l, i) =
                at3(l, i, j) = at3(l, j, i) = v;
          }
    }
  }

  // Largest symmetry defect across stored orders.
  double symmetry_defect() const {
    const std::size_t M = grid.nodes;
    double worst = 0.0;
    if (n_max >= 2)
      for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = i + 1; j < M; ++j)
          worst = std::max(worst, std::abs(at2(i, j) - at2(j, i)));
    if (n_max >= 3)
      for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j)
          for (std::size_t l = 0; l < M; ++l)
            worst = std::max(worst,
                             std::abs(at3(i, j, l) - at3(j, i, l)));
    return worst;
  }

  void validate() const {
    check_internal(k0 == 1.0, "CorrelationTable: k(empty) must be 1");
    double lo = 0.0;
    for (double v : k1) lo = std::min(lo, v);
    for (double v : k2) lo = std::min(lo, v);
    for (double v : k3) lo = std::min(lo, v);
    check_internal(lo >= -1e-10, "CorrelationTable: negative entries");
    check_internal(symmetry_defect() <= 1e-10,
                   "CorrelationTable: arrays not symmetric");
  }

  // Empirical type: max over stored orders of (sup k^(n))^{1/n}.
  double type_estimate() const {
    double type = 0.0;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    for (double v : k1) m1 = std::max(m1, v);
    for (double v : k2) m2 = std::max(m2, v);
    for (double v : k3) m3 = std::max(m3, v);
    type = std::max(type, m1);
    if (n_max >= 2) type = std::max(type, std::sqrt(m2));
    if (n_max >= 3) type = std::max(type, std::cbrt(m3));
    return type;
  }
};

// Quasi-observable arrays G^(n), n <= n_g (<= 2), plus G(empty).
struct QuasiObservableTable {
  Grid1D grid;
  int n_g = 0;
  double g0 = 0.0;
  std::vector<double> g1;
  std::vector<double> g2;

  static QuasiObservableTable zeros(const Grid1D& grid, int n_g) {
    require(n_g >= 0 && n_g <= 2, "QuasiObservableTable: n_g must be 0..2");
    QuasiObservableTable g;
    g.grid = grid;
    g.n_g = n_g;
    if (n_g >= 1) g.g1.assign(grid.nodes, 0.0);
    if (n_g >= 2) g.g2.assign(grid.nodes * grid.nodes, 0.0);
    return g;
  }

  double& at2(std::size_t i, std::size_t j) { return g2[i * grid.nodes + j]; }
  double at2(std::size_t i, std::size_t j) const {
    return g2[i * grid.nodes + j];
  }

  // |G|_theta = |G0| + sum_n e^{theta n}/n! * (h^n sum |G^(n)|)
  double weighted_l1_norm(double theta) const {
    const double h = grid.h();
    double s = std::abs(g0);
    if (n_g >= 1) {
      double a = 0.0;
      for (double v : g1) a += std::abs(v);
      s += std::exp(theta) * h * a;
    }
    if (n_g >= 2) {
      double a = 0.0;
      for (double v : g2) a += std::abs(v);
      s += 0.5 * std::exp(2.0 * theta) * h * h * a;
    }
    return s;
  }
};

// ||k||_theta = max_n e^{-theta n} sup |k^(n)| over stored orders.
inline double weighted_sup_norm(const CorrelationTable& k, double theta) {
  double worst = std::abs(k.k0);
  double m = 0.0;
  for (double v : k.k1) m = std::max(m, std::abs(v));
  worst = std::max(worst, m * std::exp(-theta));
  if (k.n_max >= 2) {
    m = 0.0;
    for (double v : k.k2) m = std::max(m, std::abs(v));
    worst = std::max(worst, m * std::exp(-2.0 * theta));
  }
  if (k.n_max >= 3) {
    m = 0.0;
    for (double v : k.k3) m = std::max(m, std::abs(v));
    worst = std::max(worst, m * std::exp(-3.0 * theta));
  }
  return worst;
}

// Lebesgue-Poisson integral of G: G(empty) + sum_n (1/n!) h^n sum G^(n).
inline double lp_integral(const QuasiObservableTable& g) {
  const double h = g.grid.h();
  double s = g.g0;
  if (g.n_g >= 1) {
    double a = 0.0;
    for (double v : g.g1) a += v;
    s += h * a;
  }
  if (g.n_g >= 2) {
    double a = 0.0;
    for (double v : g.g2) a += v;
    s += 0.5 * h * h * a;
  }
  return s;
}

// <<k, G>> over the shared grid, truncated at the common stored order.
inline double pairing(const CorrelationTable& k,
                      const QuasiObservableTable& g) {
  require(k.grid == g.grid, "pairing: grid mismatch");
  const double h = k.grid.h();
  double s = k.k0 * g.g0;
  if (k.n_max >= 1 && g.n_g >= 1) {
    double a = 0.0;
    for (std::size_t i = 0; i < k.k1.size(); ++i) a += k.k1[i] * g.g1[i];
    s += h * a;
  }
  if (k.n_max >= 2 && g.n_g >= 2) {
    double a = 0.0;
    for (std::size_t i = 0; i < k.k2.size(); ++i) a += k.k2[i] * g.g2[i];
    s += 0.5 * h * h * a;
  }
  return s;
}

enum class Closure { zero, poisson_factorized };

inline Closure closure_from_string(const std::string& s) {
  if (s == "zero") return Closure::zero;
  if (s == "poisson_factorized") return Closure::poisson_factorized;
  throw std::invalid_argument("unknown closure mode: " + s);
}

inline std::string to_string(Closure c) {
  return c == Closure::zero ? "zero" : "poisson_factorized";
}

namespace hierarchy_detail {

// Cluster-expansion sums (W_y k)(eta) for |eta| in {1,2,3}, split into the
// exactly-stored part and the closed-form closure part.  E(y) below is the
// one-cluster weight h sum_z k1(z) t(z-y) entering every factorized term.
struct WOperator {
  const CorrelationTable& k;
  const GridModel1D& model;
  int j_max;
  Closure closure;
  std::vector<double> E;  // factorized one-cluster weight, indexed by y

  WOperator(const CorrelationTable& k_, const GridModel1D& model_, int j_max_,
            Closure closure_)
      : k(k_), model(model_), j_max(j_max_), closure(closure_) {
    const std::size_t M = k.grid.nodes;
    E.assign(M, 0.0);
    if (closure == Closure::poisson_factorized && j_max >= 1) {
      for (std::size_t y = 0; y < M; ++y) {
        double s = 0.0;
        for (std::size_t z = 0; z < M; ++z)
          s += k.k1[z] * model.t[k.grid.diff(z, y)];
        E[y] = s * k.grid.h();
      }
    }
  }

  double closure_tail(double k1_product, std::size_t y, int j_from) const {
    if (closure == Closure::zero) return 0.0;
    double s = 0.0;
    double term = 1.0;
    for (int j = 1; j <= j_max; ++j) {
      term *= E[y] / static_cast<double>(j);
      if (j >= j_from) s += term;
    }
    return k1_product * s;
  }

  // |eta| = 1
  double eval1(std::size_t x, std::size_t y) const {
    double s = k.k1[x];
    const std::size_t M = k.grid.nodes;
    const double h = k.grid.h();
    int exact_j = std::min(j_max, k.n_max - 1);
    if (exact_j >= 1) {
      double a = 0.0;
      for (std::size_t z = 0; z < M; ++z)
        a += k.at2(x, z) * model.t[k.grid.diff(z, y)];
      s += h * a;
    }
    if (exact_j >= 2) {
      double a = 0.0;
      for (std::size_t z1 = 0; z1 < M; ++z1) {
        const double t1 = model.t[k.grid.diff(z1, y)];
        if (t1 == 0.0) continue;
        for (std::size_t z2 = 0; z2 < M; ++z2)
          a += k.at3(x, z1, z2) * t1 * model.t[k.grid.diff(z2, y)];
      }
      s += 0.5 * h * h * a;
    }
    s += closure_tail(k.k1[x], y, exact_j + 1);
    return s;
  }

  // |eta| = 2
  double eval2(std::size_t u, std::size_t v, std::size_t y) const {
    require(k.n_max >= 2, "W: order-2 argument needs n_max >= 2");
    double s = k.at2(u, v);
    const std::size_t M = k.grid.nodes;
    const double h = k.grid.h();
    int exact_j = std::min(j_max, k.n_max - 2);
    if (exact_j >= 1) {
      double a = 0.0;
      for (std::size_t z = 0; z < M; ++z)
        a += k.at3(u, v, z) * model.t[k.grid.diff(z, y)];
      s += h * a;
    }
    s += closure_tail(k.k1[u] * k.k1[v], y, exact_j + 1);
    return s;
  }

  // |eta| = 3: only the j = 0 term is ever stored.
  double eval3(std::size_t u, std::size_t v, std::size_t w,
               std::size_t y) const {
    require(k.n_max >= 3, "W: order-3 argument needs n_max >= 3");
    return k.at3(u, v, w) + closure_tail(k.k1[u] * k.k1[v] * k.k1[w], y, 1);
  }
};

}  // namespace hierarchy_detail

// Public cluster sum; rejects truncation-order violations, so no closure is
// involved.
inline double apply_W(const CorrelationTable& k, const GridModel1D& model,
                      std::size_t y, const std::vector<std::size_t>& eta,
                      int j_max) {
  require(j_max >= 0 && j_max <= 2, "apply_W: j_max must be 0..2");
  require(!eta.empty() && eta.size() <= 3, "apply_W: |eta| must be 1..3");
  require(static_cast<int>(eta.size()) + j_max <= k.n_max,
          "apply_W: truncation order violated");
  hierarchy_detail::WOperator w(k, model, j_max, Closure::zero);
  if (eta.size() == 1) return w.eval1(eta[0], y);
  if (eta.size() == 2) return w.eval2(eta[0], eta[1], y);
  return w.eval3(eta[0], eta[1], eta[2], y);
}

// Image of the truncated hierarchy operator: for every stored order the
// jump-in minus jump-out balance, with orders above n_max supplied by the
// closure.  k(empty) is invariant (image zero).
inline CorrelationTable apply_L_delta(const CorrelationTable& k,
                                      const GridModel1D& model, int j_max,
                                      Closure closure) {
  require(k.grid == model.grid, "apply_L_delta: grid mismatch");
  require(j_max >= 0 && j_max <= 2, "apply_L_delta: j_max must be 0..2");
  const std::size_t M = k.grid.nodes;
  const double h = k.grid.h();
  CorrelationTable out = CorrelationTable::zeros(k.grid, k.n_max);
  out.k0 = 0.0;

  hierarchy_detail::WOperator W(k, model, j_max, closure);
  const auto& a = model.a;
  const auto& tau = model.tau;
  auto d = [&](std::size_t i, std::size_t j) { return k.grid.diff(i, j); };

  // order 1
  {
    // W values reused across the u loop: w1[x][y] is O(M^2) to tabulate once.
    std::vector<double> w1(M * M);
    for (std::size_t x = 0; x < M; ++x)
      for (std::size_t y = 0; y < M; ++y) w1[x * M + y] = W.eval1(x, y);
    for (std::size_t u = 0; u < M; ++u) {
      double gain = 0.0, loss = 0.0;
      for (std::size_t x = 0; x < M; ++x) {
        const std::size_t dxu = d(x, u);
        gain += a[dxu] * tau[dxu] * w1[x * M + u];
        loss += a[d(u, x)] * tau[d(u, x)] * w1[u * M + x];
      }
      out.k1[u] = h * (gain - loss);
    }
  }

  // order 2
  if (k.n_max >= 2) {
    for (std::size_t u = 0; u < M; ++u) {
      for (std::size_t v = u; v < M; ++v) {
        double acc = 0.0;
        for (std::size_t x = 0; x < M; ++x) {
          // landing at u (partner v) and at v (partner u)
          acc += a[d(x, u)] * tau[d(v, u)] * tau[d(x, u)] * W.eval2(v, x, u);
          acc += a[d(x, v)] * tau[d(u, v)] * tau[d(x, v)] * W.eval2(u, x, v);
          // departures from u and from v toward x
          acc -= (a[d(u, x)] + a[d(v, x)]) * tau[d(u, x)] * tau[d(v, x)] *
                 W.eval2(u, v, x);
        }
        out.at2(u, v) = h * acc;
        out.at2(v, u) = h * acc;
      }
    }
  }

  // order 3
  if (k.n_max >= 3) {
    for (std::size_t u = 0; u < M; ++u) {
      for (std::size_t v = u; v < M; ++v) {
        for (std::size_t w = v; w < M; ++w) {
          double acc = 0.0;
          for (std::size_t x = 0; x < M; ++x) {
            acc += a[d(x, u)] * tau[d(v, u)] * tau[d(w, u)] * tau[d(x, u)] *
                   W.eval3(v, w, x, u);
            acc += a[d(x, v)] * tau[d(u, v)] * tau[d(w, v)] * tau[d(x, v)] *
                   W.eval3(u, w, x, v);
            acc += a[d(x, w)] * tau[d(u, w)] * tau[d(v, w)] * tau[d(x, w)] *
                   W.eval3(u, v, x, w);
            acc -= (a[d(u, x)] + a[d(v, x)] + a[d(w, x)]) * tau[d(u, x)] *
                   tau[d(v, x)] * tau[d(w, x)] * W.eval3(u, v, w, x);
          }
          const double val = h * acc;
          out.at3(u, v, w) = out.at3(u, w, v) = out.at3(v, u, w) =
              out.at3(v, w, u) = out.at3(w, u, v) = out.at3(w, v, u) = val;
        }
      }
    }
  }
  return out;
}

// Adjoint action on quasi-observables, orders 0..2: sums over sub-tuples
// containing the mover, with the single spectator t-factor expanded exactly.
inline QuasiObservableTable apply_L_hat(const QuasiObservableTable& g,
                                        const GridModel1D& model) {
  require(g.grid == model.grid, "apply_L_hat: grid mismatch");
  require(g.n_g <= 2, "apply_L_hat: only orders up to 2 supported");
  const std::size_t M = g.grid.nodes;
  const double h = g.grid.h();
  QuasiObservableTable out = QuasiObservableTable::zeros(g.grid, g.n_g);
  const auto& a = model.a;
  const auto& tau = model.tau;
  const auto& t = model.t;
  auto d = [&](std::size_t i, std::size_t j) { return g.grid.diff(i, j); };

  if (g.n_g >= 1) {
    for (std::size_t x = 0; x < M; ++x) {
      double acc = 0.0;
      for (std::size_t y = 0; y < M; ++y)
        acc += a[d(x, y)] * tau[d(x, y)] * (g.g1[y] - g.g1[x]);
      out.g1[x] = h * acc;
    }
  }
  if (g.n_g >= 2) {
    for (std::size_t x1 = 0; x1 < M; ++x1) {
      for (std::size_t x2 = x1; x2 < M; ++x2) {
        double acc = 0.0;
        for (std::size_t y = 0; y < M; ++y) {
          // mover alone in the sub-tuple, the other point is a spectator
          acc += a[d(x1, y)] * tau[d(x1, y)] * t[d(x2, y)] *
                 (g.g1[y] - g.g1[x1]);
          acc += a[d(x2, y)] * tau[d(x2, y)] * t[d(x1, y)] *
                 (g.g1[y] - g.g1[x2]);
          // both points in the sub-tuple, either may move
          const double pair_weight = tau[d(x1, y)] * tau[d(x2, y)];
          acc += a[d(x1, y)] * pair_weight * (g.at2(y, x2) - g.at2(x1, x2));
          acc += a[d(x2, y)] * pair_weight * (g.at2(x1, y) - g.at2(x1, x2));
        }
        out.at2(x1, x2) = h * acc;
        out.at2(x2, x1) = h * acc;
      }
    }
  }
  return out;
}

// Scale-ladder radius for the discrete operator; the cluster weight uses the
// discrete |t| mass, which is bounded by the continuum <phi>.
inline double discrete_radius_T(double theta2, double theta1,
                                const GridModel1D& model) {
  return radius_T(theta2, theta1, model.t_abs_l1());
}

struct EvolveOptions {
  double dt = 0.005;
  int j_max = 1;
  Closure closure = Closure::zero;
  bool richardson = true;  // rerun at dt/2 for the reported error estimate
};

struct SeriesTermRecord {
  int order = 0;
  double term_norm = 0.0;     // ||(L^Delta)^n k0||_{theta'}
  double envelope = 0.0;      // (n / (e T))^n ||k0||_theta
  double series_weight = 0.0; // t^n/n! * term_norm
};

struct EvolveResult {
  CorrelationTable table;
  std::vector<double> type_trace;  // empirical type after each step
  double error_estimate = 0.0;     // Richardson (rk4) or tail bound (series)
  bool within_certified_radius = true;
  std::vector<SeriesTermRecord> certificate;  // series scheme only
};

namespace hierarchy_detail {

inline void axpy(CorrelationTable& y, double c, const CorrelationTable& x) {
  for (std::size_t i = 0; i < y.k1.size(); ++i) y.k1[i] += c * x.k1[i];
  for (std::size_t i = 0; i < y.k2.size(); ++i) y.k2[i] += c * x.k2[i];
  for (std::size_t i = 0; i < y.k3.size(); ++i) y.k3[i] += c * x.k3[i];
}

inline double sup_diff(const CorrelationTable& a, const CorrelationTable& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.k1.size(); ++i)
    m = std::max(m, std::abs(a.k1[i] - b.k1[i]));
  for (std::size_t i = 0; i < a.k2.size(); ++i)
    m = std::max(m, std::abs(a.k2[i] - b.k2[i]));
  for (std::size_t i = 0; i < a.k3.size(); ++i)
    m = std::max(m, std::abs(a.k3[i] - b.k3[i]));
  return m;
}

inline CorrelationTable rk4_run(CorrelationTable k, double t_final, double dt,
                                const GridModel1D& model, int j_max,
                                Closure closure,
                                std::vector<double>* type_trace) {
  double t = 0.0;
  while (t < t_final - 1e-12) {
    const double step = std::min(dt, t_final - t);
    const CorrelationTable s1 = apply_L_delta(k, model, j_max, closure);
    CorrelationTable k2s = k;
    axpy(k2s, 0.5 * step, s1);
    const CorrelationTable s2 = apply_L_delta(k2s, model, j_max, closure);
    CorrelationTable k3s = k;
    axpy(k3s, 0.5 * step, s2);
    const CorrelationTable s3 = apply_L_delta(k3s, model, j_max, closure);
    CorrelationTable k4s = k;
    axpy(k4s, step, s3);
    const CorrelationTable s4 = apply_L_delta(k4s, model, j_max, closure);
    axpy(k, step / 6.0, s1);
    axpy(k, step / 3.0, s2);
    axpy(k, step / 3.0, s3);
    axpy(k, step / 6.0, s4);
    t += step;
    if (type_trace) type_trace->push_back(k.type_estimate());
  }
  return k;
}

}  // namespace hierarchy_detail

inline EvolveResult evolve_rk4(const CorrelationTable& k0, double t_final,
                               const GridModel1D& model,
                               const EvolveOptions& opt = {}) {
  require(t_final >= 0.0, "evolve_rk4: time must be nonnegative");
  require(opt.dt > 0.0 && opt.dt <= 0.01, "evolve_rk4: dt must be in (0, 0.01]");
  EvolveResult res;
  if (t_final == 0.0) {
    res.table = k0;
    return res;
  }
  res.table = hierarchy_detail::rk4_run(k0, t_final, opt.dt, model, opt.j_max,
                                        opt.closure, &res.type_trace);
  if (opt.richardson) {
    const CorrelationTable fine = hierarchy_detail::rk4_run(
        k0, t_final, 0.5 * opt.dt, model, opt.j_max, opt.closure, nullptr);
    res.error_estimate =
        hierarchy_detail::sup_diff(res.table, fine) / 15.0 * 16.0;
  }
  return res;
}

struct SeriesOptions {
  int n_terms = 8;
  int j_max = 1;
  Closure closure = Closure::zero;
  double theta0 = 0.0;   // norm scale for k0
  double theta1 = 1.0;   // norm scale for the images
};

// Perturbative expansion sum_n t^n/n! (L^Delta)^n k0 with the term-by-term
// norm certificate against the scale-ladder envelope.  Running past the
// certified radius flags the result instead of failing; the truncation may
// still be informative.
inline EvolveResult evolve_series(const CorrelationTable& k0, double t_final,
                                  const GridModel1D& model,
                                  const SeriesOptions& opt = {}) {
  require(t_final >= 0.0, "evolve_series: time must be nonnegative");
  require(opt.n_terms >= 1 && opt.n_terms <= 24,
          "evolve_series: n_terms must be 1..24");
  require(opt.theta1 > opt.theta0, "evolve_series: need theta1 > theta0");
  EvolveResult res;
  res.table = k0;
  const double T = discrete_radius_T(opt.theta1, opt.theta0, model);
  res.within_certified_radius = t_final < T;
  const double base_norm = weighted_sup_norm(k0, opt.theta0);

  CorrelationTable power = k0;
  double weight = 1.0;
  for (int n = 1; n <= opt.n_terms; ++n) {
    power = apply_L_delta(power, model, opt.j_max, opt.closure);
    weight *= t_final / static_cast<double>(n);
    hierarchy_detail::axpy(res.table, weight, power);
    SeriesTermRecord rec;
    rec.order = n;
    rec.term_norm = weighted_sup_norm(power, opt.theta1);
    rec.envelope =
        std::pow(static_cast<double>(n) / (std::exp(1.0) * T),
                 static_cast<double>(n)) *
        base_norm;
    rec.series_weight = weight * rec.term_norm;
    res.certificate.push_back(rec);
  }
  if (!res.certificate.empty())
    res.error_estimate = res.certificate.back().series_weight;
  res.type_trace.push_back(res.table.type_estimate());
  return res;
}

}  // namespace kawalab

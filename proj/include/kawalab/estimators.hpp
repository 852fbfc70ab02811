#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kawalab/combinatorics.hpp"
#include "kawalab/configuration.hpp"
#include "kawalab/errors.hpp"
#include "kawalab/flat_metric.hpp"
#include "kawalab/simulator.hpp"
#include "kawalab/test_functions.hpp"

namespace kawalab {

// One verification result.  The verdict is a pure function of the measured
// value, the target, and the tolerance rule, so records are reproducible
// bit for bit from the run inputs.
struct ReportRecord {
  std::string check_id;
  std::string bound_ref;  // what is being checked, in words
  double measured = 0.0;
  double std_error = 0.0;
  double target = 0.0;
  std::string tolerance_rule;
  enum class Verdict { pass, fail, flagged } verdict = Verdict::pass;
  std::string meta;

  bool passed() const { return verdict != Verdict::fail; }
};

inline std::string to_string(ReportRecord::Verdict v) {
  switch (v) {
    case ReportRecord::Verdict::pass: return "pass";
    case ReportRecord::Verdict::fail: return "fail";
    case ReportRecord::Verdict::flagged: return "flagged";
  }
  return "?";
}

// measured <= bound + n_sigma * se
inline ReportRecord make_bound_record(std::string id, std::string ref,
                                      double measured, double se, double bound,
                                      double n_sigma, std::string meta = {}) {
  ReportRecord r;
  r.check_id = std::move(id);
  r.bound_ref = std::move(ref);
  r.measured = measured;
  r.std_error = se;
  r.target = bound;
  r.tolerance_rule =
      "measured <= target + " + std::to_string(n_sigma) + "*sigma";
  r.verdict = measured <= bound + n_sigma * se ? ReportRecord::Verdict::pass
                                               : ReportRecord::Verdict::fail;
  r.meta = std::move(meta);
  return r;
}

// |measured - target| <= n_sigma * se + budget
inline ReportRecord make_match_record(std::string id, std::string ref,
                                      double measured, double se, double target,
                                      double n_sigma, double budget = 0.0,
                                      std::string meta = {}) {
  ReportRecord r;
  r.check_id = std::move(id);
  r.bound_ref = std::move(ref);
  r.measured = measured;
  r.std_error = se;
  r.target = target;
  r.tolerance_rule = "|measured - target| <= " + std::to_string(n_sigma) +
                     "*sigma + " + std::to_string(budget);
  r.verdict = std::abs(measured - target) <= n_sigma * se + budget
                  ? ReportRecord::Verdict::pass
                  : ReportRecord::Verdict::fail;
  r.meta = std::move(meta);
  return r;
}

// Integral of the tempering weight over the run's domain: pi in free d=1,
// 4 pi^2 / (3 sqrt 3) in free d=2, and the box integral in torus mode.
template <std::size_t D>
double psi_mean(const Domain<D>& domain) {
  if (!domain.torus) {
    if constexpr (D == 1)
      return kPi;
    else
      return 4.0 * kPi * kPi / (3.0 * std::sqrt(3.0));
  }
  Box<D> cell;
  for (std::size_t k = 0; k < D; ++k) {
    cell.lo[k] = -0.5 * domain.torus->side(k);
    cell.hi[k] = 0.5 * domain.torus->side(k);
  }
  const auto q = integrate_box<D>(
      [](const Point<D>& x) { return psi<D>(x); }, cell, {}, 1e-11);
  check_internal(q.converged, "psi_mean: quadrature did not converge");
  return q.value;
}

struct MeanWithError {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

inline MeanWithError summarize(const std::vector<double>& xs) {
  MeanWithError m;
  m.n = xs.size();
  if (xs.empty()) return m;
  double s = 0.0;
  for (double x : xs) s += x;
  m.mean = s / static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m.mean) * (x - m.mean);
  m.se = xs.size() > 1 ? std::sqrt(v / (static_cast<double>(xs.size()) *
                                        (static_cast<double>(xs.size()) - 1)))
                       : 0.0;
  return m;
}

// Binned estimate of the one- and two-point correlation functions at one
// query time, with per-bin standard errors across replicas.
template <std::size_t D>
struct BinnedCorrelation {
  Box<D> window;
  std::size_t bins = 0;       // per axis on the first coordinate
  std::vector<double> k1, k1_se;
  std::vector<double> k2, k2_se;  // bins x bins, order 2 only
};

template <std::size_t D>
BinnedCorrelation<D> empirical_correlation(const PathEnsemble<D>& ens,
                                           double t, int order,
                                           const Box<D>& window,
                                           std::size_t bins) {
  require(order == 1 || order == 2, "empirical_correlation: order must be 1|2");
  require(!ens.replicas.empty(), "empirical_correlation: empty ensemble");
  require(bins >= 1, "empirical_correlation: need at least one bin");
  const std::size_t qi = ens.snapshot_index(t);
  const std::size_t R = ens.replicas.size();
  // Binning runs along the first coordinate; transverse directions are
  // integrated out (the homogeneous checks only ever bin one axis).
  const double lo = window.lo[0], hi = window.hi[0];
  const double width = (hi - lo) / static_cast<double>(bins);
  double transverse = 1.0;
  for (std::size_t k = 1; k < D; ++k) transverse *= window.side(k);
  const double vol = width * transverse;

  BinnedCorrelation<D> out;
  out.window = window;
  out.bins = bins;
  std::vector<double> sum1(bins, 0.0), sum1_sq(bins, 0.0);
  std::vector<double> sum2, sum2_sq;
  if (order == 2) {
    sum2.assign(bins * bins, 0.0);
    sum2_sq.assign(bins * bins, 0.0);
  }
  std::vector<int> count(bins);
  for (const auto& rep : ens.replicas) {
    const auto& cfg = rep.snapshots[qi].second;
    std::fill(count.begin(), count.end(), 0);
    for (const auto& p : cfg.points()) {
      if (!window.contains(p)) continue;
      const auto b = std::min(
          bins - 1, static_cast<std::size_t>((p[0] - lo) / width));
      ++count[b];
    }
    for (std::size_t b = 0; b < bins; ++b) {
      const double dens = count[b] / vol;
      sum1[b] += dens;
      sum1_sq[b] += dens * dens;
    }
    if (order == 2) {
      for (std::size_t b1 = 0; b1 < bins; ++b1) {
        for (std::size_t b2 = 0; b2 < bins; ++b2) {
          // ordered distinct pairs; same-bin pairs are count*(count-1)
          const double pairs =
              b1 == b2 ? static_cast<double>(count[b1]) * (count[b1] - 1)
                       : static_cast<double>(count[b1]) * count[b2];
          const double dens = pairs / (vol * vol);
          sum2[b1 * bins + b2] += dens;
          sum2_sq[b1 * bins + b2] += dens * dens;
        }
      }
    }
  }
  auto finalize = [R](double s, double s2) {
    const double mean = s / static_cast<double>(R);
    const double var = std::max(0.0, s2 / static_cast<double>(R) - mean * mean);
    return std::pair<double, double>(mean,
                                     std::sqrt(var / static_cast<double>(R)));
  };
  out.k1.resize(bins);
  out.k1_se.resize(bins);
  for (std::size_t b = 0; b < bins; ++b)
    std::tie(out.k1[b], out.k1_se[b]) = finalize(sum1[b], sum1_sq[b]);
  if (order == 2) {
    out.k2.resize(bins * bins);
    out.k2_se.resize(bins * bins);
    for (std::size_t i = 0; i < sum2.size(); ++i)
      std::tie(out.k2[i], out.k2_se[i]) = finalize(sum2[i], sum2_sq[i]);
  }
  return out;
}

// Moment bounds at one query time: counting moments against the Poisson
// moment polynomial at the grown intensity kappa_t = kappa0 e^t, the
// tempering-weight moments, and the exponential weight at beta.
template <std::size_t D>
std::vector<ReportRecord> moment_bounds(const PathEnsemble<D>& ens, double t,
                                        const Box<D>& region, int n_top,
                                        double kappa0,
                                        const ModelParams<D>& params,
                                        double beta = 0.5) {
  require(n_top >= 1 && n_top <= 4, "moment_bounds: n must be 1..4");
  const std::size_t qi = ens.snapshot_index(t);
  const double kappa_t = kappa0 * std::exp(t);
  const double vol = region.volume();
  const double mean_psi = psi_mean(params.domain);

  std::vector<ReportRecord> records;
  std::vector<double> counts, psis;
  counts.reserve(ens.replicas.size());
  psis.reserve(ens.replicas.size());
  for (const auto& rep : ens.replicas) {
    const auto& cfg = rep.snapshots[qi].second;
    double c = 0.0, p = 0.0;
    for (const auto& pt : cfg.points()) {
      if (region.contains(pt)) c += 1.0;
      p += params.psi_tempered(pt);
    }
    counts.push_back(c);
    psis.push_back(p);
  }

  std::vector<double> powers(counts.size());
  for (int n = 1; n <= n_top; ++n) {
    for (std::size_t i = 0; i < counts.size(); ++i)
      powers[i] = std::pow(counts[i], n);
    const auto m = summarize(powers);
    records.push_back(make_bound_record(
        "count_moment_n" + std::to_string(n),
        "E[N^"+ std::to_string(n) + "] within the Poisson moment polynomial "
        "at the grown intensity",
        m.mean, m.se, touchard(n, kappa_t * vol), 4.0));
  }
  for (int n = 1; n <= n_top; ++n) {
    for (std::size_t i = 0; i < psis.size(); ++i)
      powers[i] = std::pow(psis[i], n);
    const auto m = summarize(powers);
    records.push_back(make_bound_record(
        "tempering_moment_n" + std::to_string(n),
        "E[Psi^" + std::to_string(n) + "] within the Poisson moment "
        "polynomial at kappa_t <psi>",
        m.mean, m.se, touchard(n, kappa_t * mean_psi), 4.0));
  }
  {
    for (std::size_t i = 0; i < psis.size(); ++i)
      powers[i] = std::exp(beta * psis[i]);
    const auto m = summarize(powers);
    records.push_back(make_bound_record(
        "exponential_moment", "E[e^{beta Psi}] within the exponential bound",
        m.mean, m.se,
        std::exp(kappa_t * mean_psi * (std::exp(beta) - 1.0)), 4.0));
  }
  return records;
}

// Weak-evolution residual between two query times:
// E F(t2) - E F(t1) - int E[LF] dt, with the time integral on the recorded
// grid and the generator estimated by per-replica Monte Carlo.
template <std::size_t D>
ReportRecord fp_residual(const PathEnsemble<D>& ens, const TestFunction<D>& F,
                         double t1, double t2, const ModelParams<D>& params,
                         std::size_t mc_samples = 8,
                         std::uint64_t seed_salt = 0x9e2a) {
  require(t2 >= t1, "fp_residual: need t2 >= t1");
  if (t1 == t2) {
    ReportRecord r = make_match_record("fp_residual", "weak evolution identity",
                                       0.0, 0.0, 0.0, 4.0);
    return r;
  }
  std::vector<std::size_t> grid;
  for (std::size_t i = 0; i < ens.query_times.size(); ++i)
    if (ens.query_times[i] >= t1 - 1e-12 && ens.query_times[i] <= t2 + 1e-12)
      grid.push_back(i);
  require(grid.size() >= 3, "fp_residual: need at least 3 query points in [t1,t2]");

  const std::size_t R = ens.replicas.size();
  std::vector<double> per_replica(R, 0.0);
  std::vector<std::vector<double>> lf(grid.size(), std::vector<double>(R));
  for (std::size_t r = 0; r < R; ++r) {
    const auto& rep = ens.replicas[r];
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      const auto& cfg = rep.snapshots[grid[gi]].second;
      const auto est = apply_generator_mc(
          F, cfg, params, mc_samples,
          derive_seed(ens.base_seed ^ seed_salt, r * grid.size() + gi));
      lf[gi][r] = est.value;
    }
    double integral = 0.0;
    for (std::size_t gi = 0; gi + 1 < grid.size(); ++gi) {
      const double dt =
          ens.query_times[grid[gi + 1]] - ens.query_times[grid[gi]];
      integral += 0.5 * dt * (lf[gi][r] + lf[gi + 1][r]);
    }
    per_replica[r] = F(rep.snapshots[grid.back()].second) -
                     F(rep.snapshots[grid.front()].second) - integral;
  }
  const auto m = summarize(per_replica);

  // Crude curvature budget for the trapezoid-in-time error.
  double max_dd = 0.0;
  double dt_max = 0.0;
  for (std::size_t gi = 0; gi + 1 < grid.size(); ++gi)
    dt_max = std::max(
        dt_max, ens.query_times[grid[gi + 1]] - ens.query_times[grid[gi]]);
  for (std::size_t gi = 1; gi + 1 < grid.size(); ++gi) {
    const auto a = summarize(lf[gi - 1]);
    const auto b = summarize(lf[gi]);
    const auto c = summarize(lf[gi + 1]);
    const double h1 = ens.query_times[grid[gi]] - ens.query_times[grid[gi - 1]];
    const double h2 = ens.query_times[grid[gi + 1]] - ens.query_times[grid[gi]];
    const double dd =
        std::abs((c.mean - b.mean) / h2 - (b.mean - a.mean) / h1) /
        (0.5 * (h1 + h2));
    max_dd = std::max(max_dd, dd);
  }
  const double budget = (t2 - t1) / 12.0 * dt_max * dt_max * max_dd;
  return make_match_record(
      "fp_residual", "weak evolution identity between two query times",
      m.mean, m.se, 0.0, 4.0, 4.0 * budget);
}

// Pathwise triple-distance functional: the mean product of consecutive
// path distances, which scales as the square of the triple width for a
// process with cadlag versions.
template <std::size_t D>
struct ChentsovResult {
  std::vector<double> widths;   // t3 - t1 per ladder point
  std::vector<MeanWithError> w; // measured functional per ladder point
  double slope = 0.0;
  double amplitude = 0.0;       // fitted W ~ amplitude * width^slope
  bool subsampled = false;
  ReportRecord record;
};

template <std::size_t D>
ChentsovResult<D> chentsov(const PathEnsemble<D>& ens,
                           const std::vector<std::array<double, 3>>& triples,
                           double min_slope = 1.7) {
  require(triples.size() >= 2, "chentsov: need at least two triples");
  ChentsovResult<D> out;
  for (const auto& tr : triples) {
    const std::size_t i1 = ens.snapshot_index(tr[0]);
    const std::size_t i2 = ens.snapshot_index(tr[1]);
    const std::size_t i3 = ens.snapshot_index(tr[2]);
    std::vector<double> vals;
    vals.reserve(ens.replicas.size());
    for (const auto& rep : ens.replicas) {
      Configuration<D> g1 = rep.snapshots[i1].second;
      Configuration<D> g2 = rep.snapshots[i2].second;
      Configuration<D> g3 = rep.snapshots[i3].second;
      auto clip = [&out](Configuration<D>& g) {
        if (g.size() > 400) {
          out.subsampled = true;
          std::vector<Point<D>> pts(g.points().begin(),
                                    g.points().begin() + 400);
          g = Configuration<D>(std::move(pts));
        }
      };
      clip(g1);
      clip(g2);
      clip(g3);
      vals.push_back(bl_metric(g1, g2) * bl_metric(g2, g3));
    }
    out.widths.push_back(tr[2] - tr[0]);
    out.w.push_back(summarize(vals));
  }
  // Least-squares line through (log width, log W).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < out.widths.size(); ++i) {
    if (out.w[i].mean <= 0.0) continue;
    const double x = std::log(out.widths[i]);
    const double y = std::log(out.w[i].mean);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  require(n >= 2, "chentsov: not enough positive measurements to fit");
  const double nn = static_cast<double>(n);
  out.slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  out.amplitude = std::exp((sy - out.slope * sx) / nn);
  ReportRecord r;
  r.check_id = "chentsov_slope";
  r.bound_ref =
      "triple-distance functional grows near-quadratically in the width";
  r.measured = out.slope;
  r.target = min_slope;
  r.tolerance_rule = "measured >= target";
  r.verdict = out.slope >= min_slope ? ReportRecord::Verdict::pass
                                     : ReportRecord::Verdict::fail;
  if (out.subsampled) r.verdict = ReportRecord::Verdict::flagged;
  r.meta = "pathwise product estimator over single trajectories";
  out.record = r;
  return out;
}

// Gap between an approximating family and the base dynamics for a fixed
// observable, across an alpha ladder run with matched seeds.
template <std::size_t D>
struct AlphaGapResult {
  std::vector<double> alphas;
  std::vector<double> gaps;
  std::vector<double> gap_se;
  ReportRecord record;
};

template <std::size_t D>
AlphaGapResult<D> alpha_convergence(
    const TestFunction<D>& F, double t,
    const std::vector<std::pair<double, const PathEnsemble<D>*>>& ladder,
    const PathEnsemble<D>& reference) {
  require(!ladder.empty(), "alpha_convergence: need a ladder");
  const std::size_t qi = reference.snapshot_index(t);
  std::vector<double> ref_vals;
  for (const auto& rep : reference.replicas)
    ref_vals.push_back(F(rep.snapshots[qi].second));
  const auto ref = summarize(ref_vals);

  AlphaGapResult<D> out;
  for (const auto& [alpha, ens] : ladder) {
    std::vector<double> vals;
    const std::size_t q = ens->snapshot_index(t);
    for (const auto& rep : ens->replicas)
      vals.push_back(F(rep.snapshots[q].second));
    const auto m = summarize(vals);
    out.alphas.push_back(alpha);
    out.gaps.push_back(std::abs(m.mean - ref.mean));
    out.gap_se.push_back(std::hypot(m.se, ref.se));
  }
  bool ok = true;
  for (std::size_t i = 1; i < out.gaps.size(); ++i) {
    const double slack = 2.0 * std::hypot(out.gap_se[i - 1], out.gap_se[i]);
    if (out.gaps[i] > out.gaps[i - 1] + slack) ok = false;
  }
  ReportRecord r;
  r.check_id = "alpha_convergence";
  r.bound_ref = "observable gaps decrease monotonically along the alpha ladder";
  r.measured = out.gaps.back();
  r.std_error = out.gap_se.back();
  r.target = out.gaps.front();
  r.tolerance_rule = "monotone decreasing up to 2*sigma per rung";
  r.verdict = ok ? ReportRecord::Verdict::pass : ReportRecord::Verdict::fail;
  out.record = r;
  return out;
}

// Bulk intensity growth: the peak binned density stays under the exponential
// ladder kappa0 e^t (plus 5 sigma), and under 2 kappa0 e^t inside the
// short-time window rho_eps.
template <std::size_t D>
std::vector<ReportRecord> type_growth(const PathEnsemble<D>& ens,
                                      const std::vector<double>& times,
                                      double kappa0, const Box<D>& bulk,
                                      std::size_t bins, double rho_eps_bound) {
  std::vector<ReportRecord> records;
  for (double t : times) {
    const auto binned = empirical_correlation(ens, t, 1, bulk, bins);
    double peak = 0.0, peak_se = 0.0;
    for (std::size_t b = 0; b < binned.k1.size(); ++b) {
      if (binned.k1[b] > peak) {
        peak = binned.k1[b];
        peak_se = binned.k1_se[b];
      }
    }
    records.push_back(make_bound_record(
        "type_growth_ladder_t" + std::to_string(t),
        "peak one-point density under kappa0 e^t", peak, peak_se,
        kappa0 * std::exp(t), 5.0));
    if (t < rho_eps_bound) {
      records.push_back(make_bound_record(
          "type_growth_short_time_t" + std::to_string(t),
          "peak one-point density under 2 kappa0 e^t for t < rho_eps", peak,
          peak_se, 2.0 * kappa0 * std::exp(t), 5.0));
    }
  }
  return records;
}

}  // namespace kawalab

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "kawalab/errors.hpp"
#include "kawalab/geometry.hpp"
#include "kawalab/model.hpp"
#include "kawalab/rng.hpp"

namespace kawalab {

// A finite multiset of points with a cached tempering weight
// Psi = sum_x psi(x).  Duplicate coordinates are distinct particles.
// The cache is refreshed from scratch periodically so incremental float
// error cannot accumulate past the 1e-12 contract.
template <std::size_t D>
class Configuration {
 public:
  static constexpr std::size_t kMaxSize = 10'000'000;  // desk-scale guard

  Configuration() = default;

  explicit Configuration(std::vector<Point<D>> pts) : points_(std::move(pts)) {
    require(points_.size() < kMaxSize, "Configuration: too many points");
    recompute_psi();
  }

  Configuration(std::initializer_list<Point<D>> pts)
      : Configuration(std::vector<Point<D>>(pts)) {}

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<Point<D>>& points() const { return points_; }
  const Point<D>& operator[](std::size_t i) const { return points_[i]; }

  double psi_total() const { return psi_total_; }

  double psi_total_recomputed() const {
    double s = 0.0;
    for (const auto& p : points_) s += psi<D>(p);
    return s;
  }

  void add(const Point<D>& p) {
    require(points_.size() + 1 < kMaxSize, "Configuration: too many points");
    points_.push_back(p);
    psi_total_ += psi<D>(p);
    maybe_refresh();
  }

  void move_point(std::size_t i, const Point<D>& to) {
    psi_total_ += psi<D>(to) - psi<D>(points_.at(i));
    points_[i] = to;
    maybe_refresh();
  }

  void remove(std::size_t i) {
    psi_total_ -= psi<D>(points_.at(i));
    points_[i] = points_.back();
    points_.pop_back();
    maybe_refresh();
  }

  // Exact-coordinate lookup; multiset semantics return the first instance.
  std::optional<std::size_t> find(const Point<D>& p) const {
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (points_[i] == p) return i;
    return std::nullopt;
  }

 private:
  void maybe_refresh() {
    if (++mutations_ >= 1024) {
      recompute_psi();
      mutations_ = 0;
    }
  }

  void recompute_psi() { psi_total_ = psi_total_recomputed(); }

  std::vector<Point<D>> points_;
  double psi_total_ = 0.0;
  unsigned mutations_ = 0;
};

// Homogeneous Poisson sample on a window: N ~ Poisson(kappa |window|),
// then N independent uniform points.
template <std::size_t D>
Configuration<D> sample_poisson_window(double kappa, const Box<D>& window,
                                       Rng& rng) {
  require(kappa > 0.0, "sample_poisson_window: kappa must be positive");
  window.validate();
  const double mean = kappa * window.volume();
  const std::uint64_t n = sample_poisson(rng, mean);
  std::vector<Point<D>> pts;
  pts.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Point<D> p;
    for (std::size_t k = 0; k < D; ++k)
      p[k] = window.lo[k] + window.side(k) * rng.next_double();
    pts.push_back(p);
  }
  return Configuration<D>(std::move(pts));
}

// H(gamma) = sum over ordered distinct pairs of psi(x) psi(y) / |x-y|^(d*eps);
// +infinity when two particles coincide exactly.
template <std::size_t D>
double simplicity_H(const Configuration<D>& gamma, double eps) {
  require(eps > 0.0 && eps < 1.0, "simplicity_H: eps must be in (0,1)");
  const double expo = static_cast<double>(D) * eps;
  double total = 0.0;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    for (std::size_t j = 0; j < gamma.size(); ++j) {
      if (i == j) continue;
      const double r = distance(gamma[i], gamma[j]);
      if (r == 0.0) return std::numeric_limits<double>::infinity();
      total += psi<D>(gamma[i]) * psi<D>(gamma[j]) / std::pow(r, expo);
    }
  }
  return total;
}

}  // namespace kawalab

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "kawalab/errors.hpp"
#include "kawalab/geometry.hpp"
#include "kawalab/quadrature.hpp"
#include "kawalab/rng.hpp"

namespace kawalab {

inline constexpr double kPi = 3.14159265358979323846;

// Tempering weight 1 / (1 + |x|^(d+1)).
template <std::size_t D>
inline double psi(const Point<D>& x) {
  return 1.0 / (1.0 + std::pow(norm(x), static_cast<double>(D + 1)));
}

// 1 / (1 + alpha |x|^(d+1)); identically 1 at alpha = 0.
template <std::size_t D>
inline double psi_alpha(const Point<D>& x, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "psi_alpha: alpha must be in [0,1]");
  if (alpha == 0.0) return 1.0;
  return 1.0 / (1.0 + alpha * std::pow(norm(x), static_cast<double>(D + 1)));
}

enum class KernelFamily { gaussian, laplace, uniform_ball };
enum class PotentialFamily { box, bump, truncated_gaussian };

inline std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::laplace: return "laplace";
    case KernelFamily::uniform_ball: return "uniform_ball";
  }
  return "?";
}

inline std::string to_string(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::box: return "box";
    case PotentialFamily::bump: return "bump";
    case PotentialFamily::truncated_gaussian: return "truncated_gaussian";
  }
  return "?";
}

inline KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "gaussian") return KernelFamily::gaussian;
  if (s == "laplace") return KernelFamily::laplace;
  if (s == "uniform_ball") return KernelFamily::uniform_ball;
  throw std::invalid_argument("unknown kernel family: " + s);
}

inline PotentialFamily potential_family_from_string(const std::string& s) {
  if (s == "box") return PotentialFamily::box;
  if (s == "bump") return PotentialFamily::bump;
  if (s == "truncated_gaussian") return PotentialFamily::truncated_gaussian;
  throw std::invalid_argument("unknown potential family: " + s);
}

// Normalized jump displacement density with exact per-family sampling and
// analytic absolute moments m_l, l = 0..d+1.  All families are even, so the
// rate factor a(x-y) equals the density of the displacement y-x.
template <std::size_t D>
class JumpKernel {
  static_assert(D == 1 || D == 2, "JumpKernel: only d=1,2 supported");

 public:
  JumpKernel(KernelFamily family, double scale)
      : family_(family), scale_(scale) {
    require(scale > 0.0, "JumpKernel: scale must be positive");
    compute_moments();
  }

  KernelFamily family() const { return family_; }
  double scale() const { return scale_; }

  double density(const Point<D>& x) const { return density_radial(norm(x)); }

  double density_radial(double r) const {
    const double s = scale_;
    switch (family_) {
      case KernelFamily::gaussian:
        if constexpr (D == 1)
          return std::exp(-0.5 * r * r / (s * s)) / (s * std::sqrt(2.0 * kPi));
        else
          return std::exp(-0.5 * r * r / (s * s)) / (2.0 * kPi * s * s);
      case KernelFamily::laplace:
        if constexpr (D == 1)
          return std::exp(-r / s) / (2.0 * s);
        else
          return std::exp(-r / s) / (2.0 * kPi * s * s);
      case KernelFamily::uniform_ball:
        if constexpr (D == 1)
          return r <= s ? 1.0 / (2.0 * s) : 0.0;
        else
          return r <= s ? 1.0 / (kPi * s * s) : 0.0;
    }
    return 0.0;
  }

  double sup_density() const { return density_radial(0.0); }

  // Radius outside which the remaining mass is below 1e-12.
  double support_radius() const {
    switch (family_) {
      case KernelFamily::gaussian: return (D == 1 ? 8.0 : 9.0) * scale_;
      case KernelFamily::laplace: return (D == 1 ? 30.0 : 34.0) * scale_;
      case KernelFamily::uniform_ball: return scale_;
    }
    return 0.0;
  }

  // m_l = integral of |x|^l a(x) dx, exact closed forms.
  double moment(std::size_t l) const { return moments_.at(l); }
  const std::vector<double>& moments() const { return moments_; }

  // Fourier transform of the density at wavenumber k (d = 1 only); used as
  // the free-dynamics oracle.
  double characteristic_1d(double k) const {
    require(D == 1, "characteristic_1d: only for d=1");
    const double s = scale_;
    switch (family_) {
      case KernelFamily::gaussian: return std::exp(-0.5 * s * s * k * k);
      case KernelFamily::laplace: return 1.0 / (1.0 + s * s * k * k);
      case KernelFamily::uniform_ball:
        return k == 0.0 ? 1.0 : std::sin(k * s) / (k * s);
    }
    return 0.0;
  }

  Point<D> sample_displacement(Rng& rng) const {
    const double s = scale_;
    if constexpr (D == 1) {
      switch (family_) {
        case KernelFamily::gaussian:
          return {s * sample_normal(rng)};
        case KernelFamily::laplace: {
          const double u = rng.next_double() - 0.5;
          return {-s * std::copysign(std::log(1.0 - 2.0 * std::abs(u)), -u)};
        }
        case KernelFamily::uniform_ball:
          return {s * (2.0 * rng.next_double() - 1.0)};
      }
    } else {
      switch (family_) {
        case KernelFamily::gaussian:
          return {s * sample_normal(rng), s * sample_normal(rng)};
        case KernelFamily::laplace: {
          // Radial density r e^{-r/s} / s^2, so r ~ Gamma(2, s).
          const double r =
              -s * std::log(sample_uniform_open(rng) * sample_uniform_open(rng));
          const double phi = 2.0 * kPi * rng.next_double();
          return {r * std::cos(phi), r * std::sin(phi)};
        }
        case KernelFamily::uniform_ball: {
          const double r = s * std::sqrt(rng.next_double());
          const double phi = 2.0 * kPi * rng.next_double();
          return {r * std::cos(phi), r * std::sin(phi)};
        }
      }
    }
    return {};
  }

 private:
  void compute_moments() {
    const double s = scale_;
    moments_.assign(D + 2, 0.0);
    moments_[0] = 1.0;
    if constexpr (D == 1) {
      switch (family_) {
        case KernelFamily::gaussian:
          moments_[1] = s * std::sqrt(2.0 / kPi);
          moments_[2] = s * s;
          break;
        case KernelFamily::laplace:
          moments_[1] = s;
          moments_[2] = 2.0 * s * s;
          break;
        case KernelFamily::uniform_ball:
          moments_[1] = s / 2.0;
          moments_[2] = s * s / 3.0;
          break;
      }
    } else {
      switch (family_) {
        case KernelFamily::gaussian:
          moments_[1] = s * std::sqrt(kPi / 2.0);
          moments_[2] = 2.0 * s * s;
          moments_[3] = 3.0 * s * s * s * std::sqrt(kPi / 2.0);
          break;
        case KernelFamily::laplace:
          moments_[1] = 2.0 * s;
          moments_[2] = 6.0 * s * s;
          moments_[3] = 24.0 * s * s * s;
          break;
        case KernelFamily::uniform_ball:
          moments_[1] = 2.0 * s / 3.0;
          moments_[2] = s * s / 2.0;
          moments_[3] = 2.0 * s * s * s / 5.0;
          break;
      }
    }
  }

  KernelFamily family_;
  double scale_;
  std::vector<double> moments_;
};

// Bounded repulsion with compact (or certified) support; no hard core.
template <std::size_t D>
class Potential {
  static_assert(D == 1 || D == 2, "Potential: only d=1,2 supported");

 public:
  Potential(PotentialFamily family, double height, double range)
      : family_(family), height_(height), range_(range) {
    require(height >= 0.0, "Potential: height must be nonnegative");
    require(range > 0.0, "Potential: range must be positive");
    compute_mean();
  }

  static Potential free_case() { return Potential(PotentialFamily::box, 0.0, 1.0); }

  PotentialFamily family() const { return family_; }
  double height() const { return height_; }
  double range() const { return range_; }

  double value(const Point<D>& x) const { return value_radial(norm(x)); }

  double value_radial(double r) const {
    if (height_ == 0.0) return 0.0;
    switch (family_) {
      case PotentialFamily::box:
        return r <= range_ ? height_ : 0.0;
      case PotentialFamily::bump: {
        const double q = r / range_;
        if (q >= 1.0) return 0.0;
        return height_ * std::exp(1.0 - 1.0 / (1.0 - q * q));
      }
      case PotentialFamily::truncated_gaussian: {
        if (r > support_radius()) return 0.0;
        return height_ * std::exp(-0.5 * r * r / (range_ * range_));
      }
    }
    return 0.0;
  }

  // Radius beyond which the value stays below 1e-14 * height.
  double support_radius() const {
    if (family_ == PotentialFamily::truncated_gaussian)
      return range_ * std::sqrt(2.0 * std::log(1e14));
    return range_;
  }

  double mean_integral() const { return mean_integral_; }  // <phi>

 private:
  void compute_mean() {
    if (height_ == 0.0) {
      mean_integral_ = 0.0;
      return;
    }
    if (family_ == PotentialFamily::box) {
      mean_integral_ = D == 1 ? height_ * 2.0 * range_
                              : height_ * kPi * range_ * range_;
      return;
    }
    const double R = support_radius();
    QuadratureResult q;
    if constexpr (D == 1) {
      q = integrate_1d([&](double r) { return value_radial(std::abs(r)); }, -R,
                       R, 1e-12);
    } else {
      q = integrate_1d(
          [&](double r) { return 2.0 * kPi * r * value_radial(r); }, 0.0, R,
          1e-12);
    }
    check_internal(q.converged, "Potential: <phi> quadrature did not converge");
    mean_integral_ = q.value;
  }

  PotentialFamily family_;
  double height_;
  double range_;
  double mean_integral_ = 0.0;
};

// Model ingredients plus the derived constants used by bounds and radii.
template <std::size_t D>
struct ModelParams {
  JumpKernel<D> kernel;
  Potential<D> potential;
  double alpha = 0.0;
  Domain<D> domain;  // free space unless a torus is set

  ModelParams(JumpKernel<D> k, Potential<D> p, double a = 0.0,
              Domain<D> dom = {})
      : kernel(std::move(k)), potential(std::move(p)), alpha(a),
        domain(std::move(dom)) {
    require(alpha >= 0.0 && alpha <= 1.0, "ModelParams: alpha must be in [0,1]");
  }

  static double binom_small(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
      r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
  }

  // c_a = 2 + sum_{l=0}^{d+1} C(d+1, l) m_l
  double c_a() const {
    double s = 2.0;
    for (std::size_t l = 0; l <= D + 1; ++l)
      s += binom_small(D + 1, l) * kernel.moment(l);
    return s;
  }

  // C_a = m_1 + sum_{l=1}^{d+1} C(d+1, l) m_l
  double big_c_a() const {
    double s = kernel.moment(1);
    for (std::size_t l = 1; l <= D + 1; ++l)
      s += binom_small(D + 1, l) * kernel.moment(l);
    return s;
  }

  double psi_tempered(const Point<D>& x) const {
    return psi<D>(domain.tempering_argument(x));
  }

  double psi_alpha_tempered(const Point<D>& x) const {
    return psi_alpha<D>(domain.tempering_argument(x), alpha);
  }

  // Stable fingerprint of the physical ingredients, recorded with runs.
  std::uint64_t digest() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
      for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xffu;
        h *= 1099511628211ull;
      }
    };
    auto mixd = [&](double x) {
      std::uint64_t bits;
      static_assert(sizeof bits == sizeof x);
      std::memcpy(&bits, &x, sizeof bits);
      mix(bits);
    };
    mix(D);
    mix(static_cast<std::uint64_t>(kernel.family()));
    mixd(kernel.scale());
    mix(static_cast<std::uint64_t>(potential.family()));
    mixd(potential.height());
    mixd(potential.range());
    mixd(alpha);
    mix(domain.torus ? 1 : 0);
    if (domain.torus) {
      for (std::size_t k = 0; k < D; ++k) {
        mixd(domain.torus->lo[k]);
        mixd(domain.torus->hi[k]);
      }
    }
    return h;
  }
};

// Radius T(theta2, theta1) = (theta2 - theta1)/2 * exp(-<phi> e^{theta2}).
inline double radius_T(double theta2, double theta1, double phi_mean) {
  require(theta2 > theta1, "radius_T: need theta2 > theta1");
  require(phi_mean >= 0.0, "radius_T: <phi> must be nonnegative");
  return 0.5 * (theta2 - theta1) * std::exp(-phi_mean * std::exp(theta2));
}

// Unique positive solution of delta * e^delta = e^{-theta} / <phi>, by Newton
// iteration on log(delta) + delta = log(rhs) with a bisection fallback.
// The free case <phi> = 0 has infinite radius; +infinity is returned then.
inline double delta_theta(double theta, double phi_mean) {
  require(phi_mean >= 0.0, "delta_theta: <phi> must be nonnegative");
  if (phi_mean == 0.0) return std::numeric_limits<double>::infinity();
  const double rhs = std::exp(-theta) / phi_mean;
  const double target = std::log(rhs);
  double x = std::log(1.0 + rhs);  // start
  if (x <= 0.0) x = rhs;           // tiny rhs: delta ~ rhs
  for (int it = 0; it < 100; ++it) {
    const double f = std::log(x) + x - target;
    const double step = f / (1.0 / x + 1.0);
    double next = x - step;
    if (next <= 0.0) next = 0.5 * x;  // fallback bisection toward 0
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  check_internal(std::abs(x * std::exp(x) - rhs) <=
                     std::max(1e-12, 1e-14 * rhs),
                 "delta_theta: Newton iteration did not converge");
  return x;
}

// tau(theta) = delta/2 * exp(-1/delta): the best radius over ladders above
// theta; the supremum of radius_T(theta', theta) is attained at
// theta' = theta + delta(theta).
inline double tau_theta(double theta, double phi_mean) {
  const double d = delta_theta(theta, phi_mean);
  if (!std::isfinite(d)) return std::numeric_limits<double>::infinity();
  return 0.5 * d * std::exp(-1.0 / d);
}

// rho_eps = (1/c_a) * (log(1 + e - eps) - 1), eps in (0,1).
inline double rho_eps(double eps, double c_a) {
  require(eps > 0.0 && eps < 1.0, "rho_eps: eps must be in (0,1)");
  require(c_a > 0.0, "rho_eps: c_a must be positive");
  return (std::log(1.0 + std::exp(1.0) - eps) - 1.0) / c_a;
}

}  // namespace kawalab

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>

#include "kawalab/errors.hpp"

namespace kawalab {

template <std::size_t D>
using Point = std::array<double, D>;

template <std::size_t D>
inline Point<D> operator+(Point<D> a, const Point<D>& b) {
  for (std::size_t i = 0; i < D; ++i) a[i] += b[i];
  return a;
}

template <std::size_t D>
inline Point<D> operator-(Point<D> a, const Point<D>& b) {
  for (std::size_t i = 0; i < D; ++i) a[i] -= b[i];
  return a;
}

template <std::size_t D>
inline double norm(const Point<D>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

template <std::size_t D>
inline double distance(const Point<D>& a, const Point<D>& b) {
  return norm(a - b);
}

// Axis-aligned box; the sampling window and the optional torus domain.
template <std::size_t D>
struct Box {
  Point<D> lo{};
  Point<D> hi{};

  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < D; ++i) v *= hi[i] - lo[i];
    return v;
  }

  double side(std::size_t i) const { return hi[i] - lo[i]; }

  Point<D> center() const {
    Point<D> c;
    for (std::size_t i = 0; i < D; ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return c;
  }

  bool contains(const Point<D>& p) const {
    for (std::size_t i = 0; i < D; ++i)
      if (p[i] < lo[i] || p[i] >= hi[i]) return false;
    return true;
  }

  void validate() const {
    for (std::size_t i = 0; i < D; ++i)
      require(hi[i] > lo[i], "Box: degenerate window");
  }

  // Wraps p into the box, coordinate-wise.
  Point<D> wrap(Point<D> p) const {
    for (std::size_t i = 0; i < D; ++i) {
      const double len = side(i);
      p[i] = lo[i] + std::fmod(std::fmod(p[i] - lo[i], len) + len, len);
    }
    return p;
  }

  // Minimum-image displacement a-b on the torus.
  Point<D> wrap_displacement(Point<D> d) const {
    for (std::size_t i = 0; i < D; ++i) {
      const double len = side(i);
      d[i] -= len * std::round(d[i] / len);
    }
    return d;
  }
};

// Geometry of a run: free space or a torus with wrapped displacements.
template <std::size_t D>
struct Domain {
  std::optional<Box<D>> torus;

  Point<D> displacement(const Point<D>& a, const Point<D>& b) const {
    Point<D> d = a - b;
    if (torus) d = torus->wrap_displacement(d);
    return d;
  }

  double dist(const Point<D>& a, const Point<D>& b) const {
    return norm(displacement(a, b));
  }

  Point<D> place(Point<D> p) const { return torus ? torus->wrap(p) : p; }

  // In torus mode the tempering weight is taken at the displacement from the
  // torus center, so it is well defined on wrapped coordinates.
  Point<D> tempering_argument(const Point<D>& p) const {
    if (!torus) return p;
    return torus->wrap_displacement(p - torus->center());
  }
};

}  // namespace kawalab

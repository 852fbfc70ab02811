#pragma once

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>
#include <cmath>
#include <cstddef>
#include <vector>

#include "kawalab/errors.hpp"

namespace kawalab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::rational<BigInt>;

// Exact integer kernels: Stirling numbers, Touchard polynomials, the
// composition sets C_{m,n} with their multinomial weights, and the forward
// difference coefficients w_k(m,n).  Everything is arbitrary-precision, so
// results never wrap; absurd input sizes are rejected instead.

namespace detail {
inline void guard_size(unsigned long n, const char* who) {
  require(n <= 2000, std::string(who) + ": argument exceeds supported range");
}
}  // namespace detail

inline BigInt factorial(unsigned long n) {
  detail::guard_size(n, "factorial");
  BigInt r = 1;
  for (unsigned long i = 2; i <= n; ++i) r *= i;
  return r;
}

inline BigInt binomial(unsigned long n, unsigned long k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (unsigned long i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

inline BigInt ipow(const BigInt& base, unsigned long e) {
  BigInt r = 1;
  BigInt b = base;
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

// S(n,l): number of ways to divide n labeled items into l unlabeled groups.
// S(n,0) = [n == 0], S(n,l) = 0 for l > n.
inline BigInt stirling2(unsigned long n, unsigned long l) {
  detail::guard_size(n, "stirling2");
  if (l > n) return 0;
  if (n == 0) return 1;
  if (l == 0) return 0;
  // Triangle recurrence, one rolling row.
  std::vector<BigInt> row(n + 1, 0);
  row[0] = 1;  // S(0,0)
  for (unsigned long i = 1; i <= n; ++i) {
    for (unsigned long j = std::min(i, static_cast<unsigned long>(n)); j >= 1;
         --j) {
      row[j] = BigInt(j) * row[j] + row[j - 1];
    }
    row[0] = 0;
  }
  return row[l];
}

// Coefficients of T_n: index l holds S(n,l), l = 0..n.
inline std::vector<BigInt> touchard_coeffs(unsigned long n) {
  detail::guard_size(n, "touchard_coeffs");
  std::vector<BigInt> row(n + 1, 0);
  row[0] = 1;
  for (unsigned long i = 1; i <= n; ++i) {
    for (unsigned long j = i; j >= 1; --j)
      row[j] = BigInt(j) * row[j] + row[j - 1];
    row[0] = 0;
  }
  return row;
}

// T_n(x) = sum_l S(n,l) x^l; gives the n-th moment of a Poisson variable
// with mean x.  T_0 = 1.
inline double touchard(unsigned long n, double x) {
  const auto coeffs = touchard_coeffs(n);
  double acc = 0.0;
  for (std::size_t l = coeffs.size(); l-- > 0;)
    acc = acc * x + static_cast<double>(coeffs[l]);
  return acc;
}

// One element of C_{m,n}: counts (c_0, ..., c_n) with sum c_k = m and
// sum k*c_k = n.  Entries beyond index n are identically zero and not stored.
struct Composition {
  std::vector<unsigned long> counts;
  unsigned long m = 0;
  unsigned long n = 0;

  void validate() const {
    require(m >= 1, "Composition: m must be positive");
    require(counts.size() == n + 1, "Composition: counts must be dense up to n");
    unsigned long sum = 0, weighted = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      sum += counts[k];
      weighted += static_cast<unsigned long>(k) * counts[k];
    }
    require(sum == m, "Composition: counts do not sum to m");
    require(weighted == n, "Composition: weighted counts do not sum to n");
  }
};

namespace detail {
inline void enumerate_rec(unsigned long k, unsigned long n,
                          unsigned long m_left, unsigned long n_left,
                          std::vector<unsigned long>& cur,
                          std::vector<Composition>& out, unsigned long m) {
  if (k == 0) {
    // c_0 takes whatever remains; it carries no weight.
    if (n_left == 0) {
      cur[0] = m_left;
      Composition c;
      c.counts = cur;
      c.m = m;
      c.n = n;
      out.push_back(std::move(c));
      cur[0] = 0;
    }
    return;
  }
  const unsigned long cap = std::min(m_left, n_left / k);
  for (unsigned long c = cap + 1; c-- > 0;) {
    cur[k] = c;
    enumerate_rec(k - 1, n, m_left - c, n_left - c * k, cur, out, m);
  }
  cur[k] = 0;
}
}  // namespace detail

// Complete enumeration of C_{m,n} in descending lexicographic order of
// (c_0, c_1, ..., c_n); e.g. C_{2,2} = [(1,0,1), (0,2,0)].
inline std::vector<Composition> enumerate_compositions(unsigned long m,
                                                       unsigned long n) {
  require(m >= 1, "enumerate_compositions: m must be positive");
  detail::guard_size(std::max(m, n), "enumerate_compositions");
  std::vector<Composition> out;
  std::vector<unsigned long> cur(n + 1, 0);
  detail::enumerate_rec(n, n, m, n, cur, out, m);
  std::sort(out.begin(), out.end(), [](const Composition& a, const Composition& b) {
    return a.counts > b.counts;
  });
  return out;
}

// C_{m,n}(c) = m! n! / (prod_k c_k! * prod_k (k!)^{c_k}); always a positive
// integer for valid c, returned as an exact rational.
inline BigRational composition_weight(const Composition& c) {
  c.validate();
  BigInt num = factorial(c.m) * factorial(c.n);
  BigInt den = 1;
  for (std::size_t k = 0; k < c.counts.size(); ++k) {
    den *= factorial(c.counts[k]);
    den *= ipow(factorial(static_cast<unsigned long>(k)), c.counts[k]);
  }
  return BigRational(num, den);
}

enum class WkMode { closed_form, recurrence };

// w_k(m,n): the k-th forward difference of s -> (m+s)^n at s = 0.
// closed_form evaluates the alternating binomial sum; recurrence iterates
// w_1(m,n+1) = m^n + (m+1) w_1(m,n),
// w_k(m,n+1) = w_{k-1}(m,n) + (m+k) w_k(m,n),  k = 2..n,
// w_{n+1}(m,n+1) = w_n(m,n) = 1,
// from w_0(m,n) = m^n.  Both modes agree exactly; w_k(m,n) = 0 for k > n.
inline BigInt wk(unsigned long m, unsigned long n, unsigned long k,
                 WkMode mode = WkMode::closed_form) {
  require(m >= 1, "wk: m must be positive");
  detail::guard_size(std::max(n, k), "wk");
  if (k > n) return 0;
  if (mode == WkMode::closed_form) {
    BigInt acc = 0;
    for (unsigned long s = 0; s <= k; ++s) {
      BigInt term = binomial(k, s) * ipow(BigInt(m + s), n);
      if ((k - s) % 2 == 1)
        acc -= term;
      else
        acc += term;
    }
    const BigInt kfac = factorial(k);
    check_internal(acc % kfac == 0, "wk: forward difference not divisible by k!");
    return acc / kfac;
  }
  // Rolling rows of the triangle w_k(m, j), j = 0..n.
  std::vector<BigInt> row(1, 1);  // j = 0: w_0 = 1
  for (unsigned long j = 0; j < n; ++j) {
    std::vector<BigInt> next(j + 2, 0);
    next[0] = ipow(BigInt(m), j + 1);
    next[1] = ipow(BigInt(m), j) + BigInt(m + 1) * (j >= 1 ? row[1] : BigInt(0));
    for (unsigned long kk = 2; kk <= j; ++kk)
      next[kk] = row[kk - 1] + BigInt(m + kk) * row[kk];
    next[j + 1] = 1;
    row = std::move(next);
  }
  return row[k];
}

}  // namespace kawalab
